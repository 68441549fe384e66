import logging

from django.utils.translation import gettext_lazy as _
from rest_framework import serializers
from rest_framework.exceptions import ValidationError as DRFValidationError
from rest_framework.renderers import JSONRenderer

from cartankit.algebra.exceptions import CartanKitError
from cartankit.algebra.graded import build_algebra
from cartankit.algebra.ratlin import format_rat
from cartankit.algebra.serializers import (
    AlgElementField,
    MatrixField,
    ModelDescriptorSerializer,
    RationalListField,
)

from .flatmodel import GroupElement, ModelPoint
from .symmetries import ConjugationRule, Symmetry, SymmetrySystem, TableRule, table_entry
from .weyl import Frame

logger = logging.getLogger(__name__)


class TaggedField(serializers.Field):
    """A field that needs the model tag: passed as ``tag=`` or taken from ``context['tag']``."""

    def __init__(self, *args, tag=None, **kwargs):
        self._tag = tag
        super().__init__(*args, **kwargs)

    @property
    def tag(self):
        return self._tag if self._tag is not None else self.context['tag']


class PointField(TaggedField):
    """Homogeneous coordinates of a model point."""

    def to_internal_value(self, data):
        coords = RationalListField().to_internal_value(data)
        try:
            return ModelPoint.of(self.tag, coords)
        except (ValueError, CartanKitError) as e:
            raise DRFValidationError(str(e))

    def to_representation(self, value: ModelPoint):
        return [format_rat(c) for c in value.coords]


class GroupElementField(TaggedField):
    def to_internal_value(self, data):
        matrix = MatrixField().to_internal_value(data)
        try:
            return GroupElement.of(self.tag, matrix)
        except (ValueError, CartanKitError) as e:
            raise DRFValidationError(str(e))

    def to_representation(self, value: GroupElement):
        return MatrixField().to_representation(value.representative)


class FrameField(TaggedField):
    """{"X": [g₋₁ coords], "g0": [[...]]}."""

    def to_internal_value(self, data):
        if not isinstance(data, dict) or 'X' not in data or 'g0' not in data:
            raise DRFValidationError(_('A frame needs "X" and "g0".'))
        algebra = build_algebra(self.tag)
        try:
            base = algebra.minus_vector(RationalListField().to_internal_value(data['X']))
            g0 = GroupElementField(tag=self.tag).to_internal_value(data['g0'])
            return Frame(base, g0)
        except (ValueError, CartanKitError) as e:
            raise DRFValidationError(str(e))

    def to_representation(self, value: Frame):
        return {
            'X': [format_rat(c) for c in value.base_X.graded_coords(-1)],
            'g0': GroupElementField().to_representation(value.g0_part),
        }


class TableEntrySerializer(serializers.Serializer):
    """One table entry, given by a g₁ vector Z (transported origin symmetry) or by an element."""

    center = PointField()
    Z = RationalListField(required=False)
    element = GroupElementField(required=False)

    def validate(self, attrs):
        if ('Z' in attrs) == ('element' in attrs):
            raise DRFValidationError(_('Give exactly one of "Z" and "element".'))
        return attrs

    def build(self, attrs) -> Symmetry:
        tag = self.context['tag']
        if 'Z' in attrs:
            return table_entry(tag, attrs['center'], attrs['Z'])
        return Symmetry(element=attrs['element'], center=attrs['center'])


class SystemDescriptorSerializer(serializers.Serializer):
    """
    Conjugation rule: {"rule": "conjugation", "model": {...}, "base_Z": [...], "twist": [[...]]}.
    Table rule: {"rule": "table", "model": {...}, "entries": [{"center": [...], "Z": [...]}, ...]}.
    """

    rule = serializers.ChoiceField(choices=['conjugation', 'table'])
    model = ModelDescriptorSerializer()

    def to_internal_value(self, data):
        attrs = super().to_internal_value(data)
        tag = ModelDescriptorSerializer.build(attrs['model'])
        context = {**self.context, 'tag': tag}
        attrs['tag'] = tag
        if attrs['rule'] == 'conjugation':
            base_z = data.get('base_Z')
            if base_z is not None:
                attrs['base_Z'] = RationalListField().run_validation(base_z)
                if len(attrs['base_Z']) != tag.dim:
                    raise DRFValidationError({'base_Z': f'Expected {tag.dim} coordinates.'})
            if data.get('twist') is not None:
                attrs['twist'] = GroupElementField(tag=tag).run_validation(data['twist'])
        else:
            entries = TableEntrySerializer(data=data.get('entries', []), many=True, context=context)
            if not entries.is_valid():
                raise DRFValidationError({'entries': entries.errors})
            attrs['entries'] = entries.validated_data
            attrs['entry_context'] = context
        return attrs

    def save(self, **kwargs) -> SymmetrySystem:
        data = self.validated_data
        tag = data['tag']
        try:
            if data['rule'] == 'conjugation':
                return ConjugationRule.standard(tag, data.get('base_Z'), data.get('twist'))
            builder = TableEntrySerializer(context=data['entry_context'])
            return TableRule(tag, [builder.build(e) for e in data['entries']])
        except CartanKitError as e:
            logger.error(f"Could not build the symmetry system: {e}", exc_info=True)
            raise DRFValidationError({'system': str(e)})

    def to_representation(self, instance: SymmetrySystem):
        out = {'rule': instance.rule, 'model': instance.tag.descriptor()}
        if isinstance(instance, ConjugationRule):
            out['base_Z'] = [format_rat(c) for c in instance.base_z.graded_coords(1)]
            if instance.is_twisted:
                out['twist'] = GroupElementField().to_representation(instance.twist)
        elif isinstance(instance, TableRule):
            out['entries'] = [
                {
                    'center': PointField().to_representation(s.center),
                    'element': GroupElementField().to_representation(s.element),
                }
                for s in instance.entries.values()
            ]
        return out


def system_from_descriptor(data) -> SymmetrySystem:
    serializer = SystemDescriptorSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


# Reports

class SymmetrySerializer(serializers.Serializer):
    center = PointField()
    element = GroupElementField()


class LoosViolationSerializer(serializers.Serializer):
    x = PointField()
    y = PointField()
    axiom = serializers.CharField()
    lhs = GroupElementField()
    rhs = GroupElementField()


class AxiomReportSerializer(serializers.Serializer):
    checked = serializers.IntegerField()
    passed = serializers.BooleanField()
    violations = LoosViolationSerializer(many=True)
    skipped = serializers.SerializerMethodField()

    def get_skipped(self, obj):
        return [[PointField().to_representation(x), PointField().to_representation(y)] for x, y in obj.skipped]


class ResidualSerializer(serializers.Serializer):
    index = serializers.IntegerField()
    residual = AlgElementField()


class CheckReportSerializer(serializers.Serializer):
    checked = serializers.IntegerField()
    passed = serializers.BooleanField()
    vacuous = serializers.BooleanField()
    violations = ResidualSerializer(many=True)
    skipped = serializers.SerializerMethodField()

    def get_skipped(self, obj):
        return [{'index': index, 'reason': reason} for index, reason in obj.skipped]


def render(document) -> bytes:
    """Deterministic JSON bytes: DRF's renderer with a fixed indent and a trailing newline."""
    return JSONRenderer().render(document, renderer_context={'indent': 2}) + b'\n'
