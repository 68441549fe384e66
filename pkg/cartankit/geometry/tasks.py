"""
Celery tasks for sample-batch checks.

Arguments and results are JSON documents: the system descriptor, serialized
samples and the index of the chunk's first sample. Results are merged in
chunk order, so the merged report does not depend on worker scheduling.
"""
import logging
from typing import Callable, List, Sequence

from celery import group, shared_task
from django.conf import settings

from cartankit.algebra.graded import build_algebra

from .serializers import (
    AxiomReportSerializer,
    CheckReportSerializer,
    FrameField,
    PointField,
    system_from_descriptor,
)
from .symmetries import check_loos_axioms
from .weyl import UpsilonField, cocycle_check, distributivity_identity_check

logger = logging.getLogger(__name__)


def _shift(system, shift):
    if shift is None:
        return None
    return build_algebra(system.tag).plus_vector(shift)


def _offset_report(document: dict, offset: int) -> dict:
    for item in document['violations'] + document['skipped']:
        item['index'] += offset
    return document


@shared_task
def check_loos_chunk(system_doc: dict, samples: List[list], offset: int = 0) -> dict:
    system = system_from_descriptor(system_doc)
    field = PointField(tag=system.tag)
    parsed = [tuple(field.to_internal_value(p) for p in sample) for sample in samples]
    report = check_loos_axioms(system, parsed)
    logger.debug(f"Loos chunk at {offset}: {report.checked} checked, {len(report.violations)} violations")
    return AxiomReportSerializer(report).data


@shared_task
def cocycle_chunk(system_doc: dict, samples: List[dict], offset: int = 0, shift=None) -> dict:
    system = system_from_descriptor(system_doc)
    points, frames = PointField(tag=system.tag), FrameField(tag=system.tag)
    parsed = [(points.to_internal_value(s['x']), frames.to_internal_value(s['frame'])) for s in samples]
    upsilon = UpsilonField(system, _shift(system, shift))
    report = cocycle_check(system, upsilon, parsed)
    return _offset_report(CheckReportSerializer(report).data, offset)


@shared_task
def distributivity_chunk(system_doc: dict, samples: List[dict], offset: int = 0, shift=None) -> dict:
    system = system_from_descriptor(system_doc)
    points, frames = PointField(tag=system.tag), FrameField(tag=system.tag)
    parsed = [
        (points.to_internal_value(s['x']), points.to_internal_value(s['y']), frames.to_internal_value(s['frame']))
        for s in samples
    ]
    report = distributivity_identity_check(system, parsed, _shift(system, shift))
    return _offset_report(CheckReportSerializer(report).data, offset)


def chunked(items: Sequence, chunks: int) -> List[tuple]:
    """Contiguous (offset, slice) chunks; never more chunks than items."""
    chunks = max(1, min(chunks, len(items)))
    size, extra = divmod(len(items), chunks)
    out, start = [], 0
    for k in range(chunks):
        end = start + size + (1 if k < extra else 0)
        out.append((start, list(items[start:end])))
        start = end
    return out


def fan_out(task, items: Sequence, build_args: Callable[[int, list], tuple], threads: int = None) -> List[dict]:
    """
    Run ``task`` over contiguous chunks of ``items``; results come back in
    chunk order. A single chunk runs in-process.
    """
    threads = threads or settings.CARTANKIT_THREADS
    parts = chunked(items, threads)
    if len(parts) == 1:
        offset, part = parts[0]
        return [task(*build_args(offset, part))]
    logger.info(f"Dispatching {task.name} over {len(parts)} chunks")
    job = group(task.s(*build_args(offset, part)) for offset, part in parts)
    return job.apply_async().get(disable_sync_subtasks=False)


def merge_reports(parts: List[dict]) -> dict:
    merged = {'checked': 0, 'violations': [], 'skipped': []}
    for part in parts:
        merged['checked'] += part['checked']
        merged['violations'] += part['violations']
        merged['skipped'] += part['skipped']
    merged['passed'] = not merged['violations']
    if parts and 'vacuous' in parts[0]:
        merged['vacuous'] = merged['checked'] == 0
    return merged
