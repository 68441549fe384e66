"""
Verification pipelines behind the ``cartan`` management command.

Each pipeline returns a JSON-ready document and whether every contract it
checks held. ``run`` turns that into an exit code and deterministic bytes.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from django.conf import settings
from rest_framework.exceptions import ValidationError as DRFValidationError

from cartankit.algebra.exceptions import CartanKitError
from cartankit.algebra.graded import (
    ModelTag,
    Projective,
    codifferential,
    decompose_curvature,
    is_normal,
    is_torsion_free,
)
from cartankit.algebra.ratlin import Mat, format_rat
from cartankit.algebra.serializers import AlgElementField, CochainSerializer, MatrixField

from . import tasks
from .exceptions import PreconditionError, SampleExhaustion
from .flatmodel import ModelPoint, chart_coordinates, origin
from .nonhomog import (
    PuncturedModel,
    closed_form_residuals,
    homogeneity_probe,
    line_symmetry,
    off_line_symmetry,
    preserve_elimination,
    printed_upper_right,
)
from .sampling import MAX_SEED, PuncturedSampler, Sampler
from .serializers import (
    FrameField,
    GroupElementField,
    PointField,
    SymmetrySerializer,
    SystemDescriptorSerializer,
    render,
    system_from_descriptor,
)
from .symmetries import (
    ConjugationRule,
    SymmetrySystem,
    TableRule,
    enumerate_origin_symmetries,
    make_origin_symmetry,
    orbit_coverage,
    tangent_doubling_check,
    verify_symmetry,
)
from .weyl import Frame, Verdict, fiberwise_identity_check, upsilon_from_system

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('flat-symmetries', 'check-system', 'invariant-weyl', 'example-nonhomog', 'normality-check')

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


@dataclass
class RunConfig:
    subcommand: str
    model: Optional[ModelTag] = None
    samples: int = field(default_factory=lambda: settings.CARTANKIT_DEFAULT_SAMPLES)
    seed: int = field(default_factory=lambda: settings.CARTANKIT_DEFAULT_SEED)
    output: Optional[str] = None
    system: Optional[dict] = None
    cochain: Optional[dict] = None
    m: int = 2
    threads: Optional[int] = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"Unknown subcommand {self.subcommand!r}")
        if not 0 <= self.seed < MAX_SEED:
            raise ValueError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.samples < 0:
            raise ValueError(f"Sample count must be non-negative, got {self.samples}")
        if self.threads is None:
            self.threads = settings.CARTANKIT_THREADS


@dataclass
class RunResult:
    exit_code: int
    document: Optional[dict] = None
    message: str = ''

    @property
    def content(self) -> bytes:
        return render(self.document) if self.document is not None else b''


def _rats(values) -> List[str]:
    return [format_rat(v) for v in values]


def _model_for(config: RunConfig) -> ModelTag:
    return config.model if config.model is not None else Projective(2)


class VerificationService:
    """One static method per subcommand; each returns (document, all_passed)."""

    @staticmethod
    def flat_symmetries(config: RunConfig) -> Tuple[dict, bool]:
        tag = _model_for(config)
        logger.info(f"Enumerating origin symmetries of {tag}")
        family = enumerate_origin_symmetries(tag)
        document = {
            'model': tag.descriptor(),
            'exists': family.exists,
            'g0_class': None,
            'z_dim': family.z_dim,
            'unique': family.is_unique,
            'null_space_dim': family.solution_dim,
            'samples': [],
        }
        if not family.exists:
            return document, True

        document['g0_class'] = GroupElementField().to_representation(family.g0_class)
        sampler = Sampler(tag, config.seed)
        zs = sampler.plus_elements(config.samples)
        passed = True
        for z in zs:
            report = verify_symmetry(make_origin_symmetry(tag, z))
            passed = passed and report.passed
            document['samples'].append({
                'Z': _rats(z.graded_coords(1)),
                'fixes_origin': report.fixes_center,
                'differential_is_minus_identity': report.differential_is_minus_identity,
                'involutive': report.involutive,
            })
        base = verify_symmetry(make_origin_symmetry(tag))
        document['verified'] = base.passed
        return document, base.passed and passed

    @staticmethod
    def check_system(config: RunConfig) -> Tuple[dict, bool]:
        if config.system is not None:
            system = system_from_descriptor(config.system)
        else:
            system = ConjugationRule.standard(_model_for(config))
        tag = system.tag
        descriptor = SystemDescriptorSerializer(system).data
        logger.info(f"Checking the {system.rule} system on {tag} with {config.samples} samples")

        sampler = Sampler(tag, config.seed)
        samples = _axiom_samples(system, sampler, config.samples)
        points = PointField(tag=tag)
        payload = [[points.to_representation(p) for p in s] for s in samples]
        parts = tasks.fan_out(
            tasks.check_loos_chunk, payload,
            lambda offset, part: (descriptor, part, offset), config.threads,
        )
        axioms = tasks.merge_reports(parts)
        document = {'model': tag.descriptor(), 'system': descriptor, 'axioms': axioms}
        passed = axioms['passed']

        entries = [
            {'center': points.to_representation(s.center), 'passed': verify_symmetry(s).passed}
            for s in _listed_symmetries(system)
        ]
        document['entries'] = entries
        passed = passed and all(e['passed'] for e in entries)

        if isinstance(system, ConjugationRule):
            x0 = origin(tag) if system.covers(origin(tag)) else samples[0][0] if samples else None
            if x0 is not None:
                jacobian = tangent_doubling_check(system, x0)
                doubled = jacobian == 2 * Mat.identity(tag.dim)
                document['tangent_doubling'] = {
                    'point': points.to_representation(x0),
                    'jacobian': MatrixField().to_representation(jacobian),
                    'is_twice_identity': doubled,
                }
                coverage = orbit_coverage(system, x0, [s[1] for s in samples])
                document['orbit'] = {'reached': len(coverage.reached), 'missed': len(coverage.missed)}
                passed = passed and doubled
        else:
            document['tangent_doubling'] = None

        if not passed:
            logger.warning(f"System check failed: {len(axioms['violations'])} axiom violations")
        return document, passed

    @staticmethod
    def invariant_weyl(config: RunConfig) -> Tuple[dict, bool]:
        if config.system is not None:
            system = system_from_descriptor(config.system)
        else:
            system = ConjugationRule.standard(_model_for(config))
        tag = system.tag
        descriptor = SystemDescriptorSerializer(system).data
        logger.info(f"Invariant gauge for the {system.rule} system on {tag}")

        sampler = Sampler(tag, config.seed)
        frames = _frames_for(system, sampler, config.samples)
        pairs = _pair_samples(system, sampler, config.samples)
        triples = _triple_samples(system, sampler, config.samples)

        upsilon = upsilon_from_system(system, frames)
        points, frame_field = PointField(tag=tag), FrameField(tag=tag)
        element = AlgElementField()

        pair_payload = [{'x': points.to_representation(x), 'frame': frame_field.to_representation(u)} for x, u in pairs]
        cocycle = tasks.merge_reports(tasks.fan_out(
            tasks.cocycle_chunk, pair_payload,
            lambda offset, part: (descriptor, part, offset), config.threads,
        ))
        triple_payload = [
            {'x': points.to_representation(x), 'y': points.to_representation(y), 'frame': frame_field.to_representation(u)}
            for x, y, u in triples
        ]
        distributivity = tasks.merge_reports(tasks.fan_out(
            tasks.distributivity_chunk, triple_payload,
            lambda offset, part: (descriptor, part, offset), config.threads,
        ))
        fiberwise = fiberwise_identity_check(system, upsilon, frames)

        verdict = Verdict.INVARIANT if cocycle['passed'] else Verdict.FIBERWISE_ONLY
        witnesses = [
            dict(violation, sample=pair_payload[violation['index']]) for violation in cocycle['violations'][:1]
        ]
        document = {
            'model': tag.descriptor(),
            'system': descriptor,
            'upsilon_samples': [
                {'frame': frame_field.to_representation(u), 'upsilon': element.to_representation(upsilon(u))}
                for u in frames
            ],
            'verdict': verdict.value,
            'witnesses': witnesses,
            'cocycle': cocycle,
            'distributivity': distributivity,
            'fiberwise': {
                'checked': fiberwise.checked,
                'passed': fiberwise.passed,
                'violations': len(fiberwise.violations),
            },
        }
        passed = verdict == Verdict.INVARIANT and distributivity['passed'] and fiberwise.passed
        if cocycle['checked'] == 0:
            logger.info("Invariant gauge verdict is vacuous: no pair could be checked")
        return document, passed

    @staticmethod
    def example_nonhomog(config: RunConfig) -> Tuple[dict, bool]:
        model = PuncturedModel(config.m)
        logger.info(f"Punctured projective space, m = {model.m}, {config.samples} samples")
        sampler = PuncturedSampler(model, config.seed)
        line_points = sampler.line_points(config.samples)
        off_line = sampler.off_line_points(min(config.samples, 8))
        automorphisms = sampler.allowed_automorphisms(config.samples)
        points = PointField(tag=model.tag)

        nonzero = []
        printed = []
        eliminations = {'preserve_solvable': 0, 'swap_unsolvable': 0, 'failed_verification': 0}
        for index, w in enumerate(line_points):
            for r in closed_form_residuals(w, model):
                if r.residual != 0:
                    nonzero.append({'index': index, 'entry': r.entry, 'residual': format_rat(r.residual)})
            xm, xm1 = w.coords[model.first], w.coords[model.second]
            s = line_symmetry(w, model)
            rep = s.element.representative
            computed = (rep * (-1 / rep[0, 0]))[model.first, model.second]
            printed.append(computed - printed_upper_right(xm, xm1, 1 / xm))
            certificate = preserve_elimination(w, model)
            eliminations['preserve_solvable'] += certificate.preserve_solvable
            eliminations['swap_unsolvable'] += not certificate.swap_solvable
            eliminations['failed_verification'] += not verify_symmetry(s).passed

        probe = homogeneity_probe(model, automorphisms, line_points[:8], off_line)
        witness_line = line_points[0] if line_points else model.line_point(1, 2)
        document = {
            'model': {'model': 'punctured-projective', 'm': model.m},
            'closed_form': {'checked': len(line_points), 'nonzero_residuals': nonzero},
            'printed_variant': {
                'differing': sum(1 for d in printed if d != 0),
                'first_residual': format_rat(printed[0]) if printed else None,
            },
            'elimination': eliminations,
            'probe': {
                'automorphisms': probe.automorphisms,
                'line_points': probe.line_points,
                'line_escapes': len(probe.line_escapes),
                'off_line_pairs': probe.off_line_pairs,
                'off_line_connected': probe.off_line_connected,
                'symmetry_failures': [points.to_representation(x) for x in probe.symmetry_failures],
                'vacuous': probe.vacuous,
            },
            'witnesses': {
                'line': SymmetrySerializer(line_symmetry(witness_line, model)).data,
                'off_line': SymmetrySerializer(off_line_symmetry(origin(model.tag), model)).data,
            },
        }
        passed = not nonzero and not any(eliminations.values()) and probe.passed
        return document, passed

    @staticmethod
    def normality_check(config: RunConfig) -> Tuple[dict, bool]:
        if config.cochain is None:
            raise PreconditionError("normality-check needs a cochain")
        serializer = CochainSerializer(data=config.cochain)
        serializer.is_valid(raise_exception=True)
        kappa = serializer.save()
        element = AlgElementField()
        parts = decompose_curvature(kappa)
        normal, torsion_free = is_normal(kappa), is_torsion_free(kappa)
        document = {
            'model': kappa.algebra.tag.descriptor(),
            'normal': normal,
            'torsion_free': torsion_free,
            'codifferential': [element.to_representation(v) for v in codifferential(kappa).values()],
            'decomposition': {
                name: [element.to_representation(v) for v in part.values]
                for name, part in (('T', parts.T), ('W', parts.W), ('Y', parts.Y))
            },
        }
        return document, normal and torsion_free


def _listed_symmetries(system: SymmetrySystem):
    if isinstance(system, TableRule):
        return list(system.entries.values())
    return [system.symmetry_at(origin(system.tag))] if system.covers(origin(system.tag)) else []


def _axiom_samples(system: SymmetrySystem, sampler: Sampler, count: int) -> List[Tuple[ModelPoint, ...]]:
    """(x, y, z) triples: random covered points, or all ordered pairs of table centers."""
    if isinstance(system, TableRule):
        centers = system.centers()
        zs = sampler.points(len(centers) ** 2)
        pairs = [(x, y) for x in centers for y in centers]
        return [(x, y, z) for (x, y), z in zip(pairs, zs)]
    return sampler.triples(count, where=lambda t: system.covers(t[0]) and system.covers(t[1]))


def _table_cells(system: TableRule) -> List[ModelPoint]:
    return [c for c in system.centers() if c.in_cell()]


def _frames_for(system: SymmetrySystem, sampler: Sampler, count: int) -> List[Frame]:
    if isinstance(system, TableRule):
        cells = _table_cells(system)
        if not cells:
            return []
        g0s = sampler.g0_elements(count)
        return [Frame(chart_coordinates(cells[k % len(cells)]), g0) for k, g0 in enumerate(g0s)]
    return sampler.frames(count, where=lambda u: system.covers(u.base_point))


def _pair_samples(system: SymmetrySystem, sampler: Sampler, count: int) -> List[Tuple[ModelPoint, Frame]]:
    if isinstance(system, TableRule):
        cells = _table_cells(system)
        if not cells:
            return []
        n = len(cells)
        g0s = sampler.g0_elements(count)
        return [
            (cells[k % n], Frame(chart_coordinates(cells[(k // n) % n]), g0))
            for k, g0 in enumerate(g0s)
        ]
    return sampler.point_frame_pairs(
        count, where=lambda s: system.covers(s[0]) and system.covers(s[1].base_point),
    )


def _triple_samples(system: SymmetrySystem, sampler: Sampler, count: int) -> List[Tuple[ModelPoint, ModelPoint, Frame]]:
    if isinstance(system, TableRule):
        cells = _table_cells(system)
        if not cells:
            return []
        n = len(cells)
        g0s = sampler.g0_elements(count)
        return [
            (cells[k % n], cells[(k // n) % n], Frame(chart_coordinates(cells[(k // (n * n)) % n]), g0))
            for k, g0 in enumerate(g0s)
        ]
    return sampler.distributivity_samples(
        count, where=lambda s: all(system.covers(p) for p in (s[0], s[1], s[2].base_point)),
    )


PIPELINES = {
    'flat-symmetries': VerificationService.flat_symmetries,
    'check-system': VerificationService.check_system,
    'invariant-weyl': VerificationService.invariant_weyl,
    'example-nonhomog': VerificationService.example_nonhomog,
    'normality-check': VerificationService.normality_check,
}


def run(config: RunConfig) -> RunResult:
    """
    Dispatch one subcommand. Exit 0 when every contract held, 1 on a
    reported violation (the document is still produced), 2 on bad input or
    sample exhaustion.
    """
    try:
        logger.info(f"Running {config.subcommand} (seed {config.seed}, {config.samples} samples)")
        document, passed = PIPELINES[config.subcommand](config)
    except SampleExhaustion as e:
        logger.error(f"{config.subcommand}: {e}")
        return RunResult(EXIT_USAGE, {'error': 'sample_exhaustion', 'detail': str(e)}, str(e))
    except DRFValidationError as e:
        logger.error(f"{config.subcommand}: invalid input {e.detail}")
        return RunResult(EXIT_USAGE, None, f"Invalid input: {e.detail}")
    except (CartanKitError, ValueError) as e:
        logger.error(f"{config.subcommand} failed: {e}", exc_info=True)
        return RunResult(EXIT_USAGE, None, str(e))
    if not passed:
        logger.warning(f"{config.subcommand}: contract violations reported")
        return RunResult(EXIT_VIOLATION, document, f"{config.subcommand}: contract violations reported")
    logger.info(f"{config.subcommand}: all contracts verified")
    return RunResult(EXIT_OK, document)

