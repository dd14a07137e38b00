"""
Trial manifests and phase annotations.

A manifest is a CSV table with at least the columns
``trial_id,isti_csv_path,label``; ``breathing_csv_path`` and the
synthetic-data columns ``clip_path,ecg_path,dzdt_path,phases_path`` are
optional. Relative paths are resolved against the manifest's directory.
"""
import logging
import os
import typing as tp

import attr

from stressnet import errors
from stressnet.formats import tables
from stressnet.formats.tables import PathT
from stressnet.stress import Phase, TrialRecord, parse_label

LOG = logging.getLogger(__name__)

REQUIRED_FIELDS = ('trial_id', 'isti_csv_path', 'label')
PATH_FIELDS = ('isti_csv_path', 'breathing_csv_path', 'clip_path', 'ecg_path',
               'dzdt_path', 'phases_path')


def _optional_path(base: str, raw: tp.Optional[str]) -> tp.Optional[str]:
    if not raw:
        return None
    return raw if os.path.isabs(raw) else os.path.join(base, raw)


@attr.s(frozen=True)
class ManifestRow:
    """One manifest entry with absolute (or cwd-relative) paths."""
    trial_id: str = attr.ib()
    label: tp.Optional[bool] = attr.ib()
    isti_csv_path: tp.Optional[str] = attr.ib(default=None)
    breathing_csv_path: tp.Optional[str] = attr.ib(default=None)
    clip_path: tp.Optional[str] = attr.ib(default=None)
    ecg_path: tp.Optional[str] = attr.ib(default=None)
    dzdt_path: tp.Optional[str] = attr.ib(default=None)
    phases_path: tp.Optional[str] = attr.ib(default=None)

    def require(self, field: str) -> str:
        """The path in `field`, or a validation error naming the trial."""
        value = getattr(self, field)
        if not value:
            raise errors.ValidationError(
                f'trial {self.trial_id!r} has no {field}'
            )
        return tp.cast(str, value)


def read_manifest(path: PathT) -> tp.List[ManifestRow]:
    rows = tables.read_table(path)
    if rows and any(field not in rows[0] for field in REQUIRED_FIELDS):
        raise errors.MalformedCsv(
            f'{path}: manifest needs the columns {", ".join(REQUIRED_FIELDS)}'
        )
    base = os.path.dirname(os.path.abspath(os.fspath(path)))
    entries = []
    for row in rows:
        paths = {
            field: _optional_path(base, row.get(field))
            for field in PATH_FIELDS
        }
        entries.append(
            ManifestRow(
                trial_id=row['trial_id'],
                label=parse_label(row.get('label', '')),
                **paths
            )
        )
    LOG.debug('%s: %d trials', path, len(entries))
    return entries


def read_phases(path: PathT) -> tp.Tuple[Phase, ...]:
    """Read a ``phase,start_s,end_s`` table."""
    try:
        return tuple(
            Phase(row['phase'], float(row['start_s']), float(row['end_s']))
            for row in tables.read_table(path)
        )
    except (KeyError, ValueError) as err:
        if isinstance(err, errors.ValidationError):
            raise
        raise errors.MalformedCsv(f'{path}: bad phase table ({err})') from err


def load_trial(row: ManifestRow, with_breathing: bool = False) -> TrialRecord:
    """Build a `TrialRecord` from the files a manifest row points to."""
    breathing = None
    if with_breathing:
        breathing = tables.read_signal(row.require('breathing_csv_path'))
    phases = read_phases(row.phases_path) if row.phases_path else ()
    return TrialRecord(
        isti=tables.read_signal(row.require('isti_csv_path')),
        phases=phases,
        label=row.label,
        breathing=breathing,
        trial_id=row.trial_id
    )
