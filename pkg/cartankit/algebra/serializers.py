import logging

from django.utils.translation import gettext_lazy as _
from rest_framework import serializers
from rest_framework.exceptions import ValidationError as DRFValidationError

from .exceptions import CartanKitError
from .graded import AlgElement, Cochain2, Conformal, Projective, build_algebra
from .ratlin import Mat, format_rat, parse_rat

logger = logging.getLogger(__name__)


class RationalField(serializers.Field):
    """A rational as "p" or "p/q"; plain JSON integers are accepted on input."""

    default_error_messages = {
        'invalid': _('"{value}" is not a rational of the form "p" or "p/q".'),
    }

    def to_internal_value(self, data):
        try:
            return parse_rat(data)
        except ValueError:
            self.fail('invalid', value=data)

    def to_representation(self, value):
        return format_rat(value)


class RationalListField(serializers.ListField):
    child = RationalField()


class MatrixField(serializers.Field):
    """A matrix as a list of rows of rationals."""

    default_error_messages = {
        'invalid': _('Expected a non-empty list of rows.'),
        'ragged': _('All rows must have the same length.'),
    }

    def to_internal_value(self, data):
        if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
            self.fail('invalid')
        if len({len(r) for r in data}) != 1:
            self.fail('ragged')
        field = RationalField()
        return Mat.from_rows([[field.to_internal_value(v) for v in row] for row in data])

    def to_representation(self, value):
        return [[format_rat(v) for v in row] for row in value.to_rows()]


class AlgElementField(serializers.Field):
    """
    An element of the algebra as its full coordinate list. The algebra comes
    from the parent serializer's context (``context['algebra']``).
    """

    def to_internal_value(self, data):
        algebra = self.context.get('algebra')
        if algebra is None:
            raise DRFValidationError(_('No algebra in context.'))
        coords = RationalListField().to_internal_value(data)
        if len(coords) != algebra.dim:
            raise DRFValidationError(f'Expected {algebra.dim} coordinates, got {len(coords)}.')
        return algebra.element(coords)

    def to_representation(self, value: AlgElement):
        return [format_rat(c) for c in value.coords]


class ModelDescriptorSerializer(serializers.Serializer):
    """{"model": "projective", "m": 2} or {"model": "conformal", "p": 3, "q": 1}."""

    model = serializers.ChoiceField(choices=['projective', 'conformal'])
    m = serializers.IntegerField(required=False, min_value=1)
    p = serializers.IntegerField(required=False, min_value=0)
    q = serializers.IntegerField(required=False, min_value=0)

    def validate(self, attrs):
        if attrs['model'] == 'projective':
            if 'm' not in attrs:
                raise DRFValidationError({'m': _('Projective models need m.')})
        else:
            if 'p' not in attrs or 'q' not in attrs:
                raise DRFValidationError({'p': _('Conformal models need p and q.')})
            if attrs['p'] + attrs['q'] < 3:
                raise DRFValidationError({'p': _('Conformal models need p + q >= 3.')})
        return attrs

    @staticmethod
    def build(data):
        if data['model'] == 'projective':
            return Projective(data['m'])
        return Conformal(data['p'], data['q'])

    def save(self, **kwargs):
        return self.build(self.validated_data)

    def to_representation(self, instance):
        return instance.descriptor()


class CochainSerializer(serializers.Serializer):
    """
    A 2-cochain on g₋₁: {"model": {...}, "values": [[coords], ...]}, one
    value per basis pair (i, j), i < j, in lexicographic order.
    """

    model = ModelDescriptorSerializer()
    values = serializers.ListField(child=serializers.ListField(child=RationalField()))

    def validate(self, attrs):
        algebra = build_algebra(ModelDescriptorSerializer.build(attrs['model']))
        values = attrs['values']
        if len(values) != len(algebra.minus_pairs):
            raise DRFValidationError({
                'values': f'{algebra.tag} cochains have {len(algebra.minus_pairs)} values, got {len(values)}.'
            })
        for k, v in enumerate(values):
            if len(v) != algebra.dim:
                raise DRFValidationError({'values': f'Value {k} needs {algebra.dim} coordinates, got {len(v)}.'})
        attrs['algebra'] = algebra
        return attrs

    def save(self, **kwargs):
        algebra = self.validated_data['algebra']
        try:
            return Cochain2(algebra, tuple(algebra.element(v) for v in self.validated_data['values']))
        except CartanKitError as e:
            logger.error(f"Could not build cochain: {e}", exc_info=True)
            raise DRFValidationError({'values': str(e)})

    def to_representation(self, instance: Cochain2):
        return {
            'model': instance.algebra.tag.descriptor(),
            'values': [AlgElementField().to_representation(v) for v in instance.values],
        }
