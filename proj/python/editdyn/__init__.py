"""Episodic editing dynamics of wiki pages."""

try:
    from . import _editdyn as _core
except ImportError:  # build tree: the extension sits next to this package
    import _editdyn as _core

from collections import Counter

Error = _core.Error
ParseError = _core.ParseError
DomainError = _core.DomainError
UnderdeterminedError = _core.UnderdeterminedError

parse_history = _core.parse_history
load_history_file = _core.load_history_file
segment_episodes = _core.segment_episodes
detect_reverts = _core.detect_reverts
ngram_spectrum = _core.ngram_spectrum
work_measure = _core.work_measure
nu = _core.nu
psi_density = _core.psi_density
pmf = _core.pmf
log_likelihood = _core.log_likelihood
fit = _core.fit
mean_group_size = _core.mean_group_size
fission_ratio = _core.fission_ratio
dunbar_series = _core.dunbar_series
simulate = _core.simulate
run_cli = _core.run_cli


def group_spectrum(episodes, include_bots=True):
    """{N: count} over episodes, skipping bot-only episodes when bots are excluded."""
    sizes = (e.group_size(include_bots) for e in episodes)
    return dict(sorted(Counter(n for n in sizes if n > 0).items()))


__all__ = [name for name in dir() if not name.startswith("_")]
