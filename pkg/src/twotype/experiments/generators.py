"""Synthetic model families used by the experiment runner.

Every generator takes a parameter mapping plus a trial index and returns a list
of ``(label, model)`` pairs, one per configuration. Reliabilities depend only on
the parameters and the base seed, truths and response streams also on the trial.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .._validation import DataError, make_rng
from ..model import TwoTypeModel, equal_split_types, sample_truth

__all__ = [
    "derive_seed",
    "phase_transition_reliabilities",
    "gen_phase_transition",
    "gen_cluster_tightness",
    "gen_pneumonia",
    "gen_jsrt",
    "JSRT_COUNTS",
    "JSRT_ACCURACY",
]

# subtlety levels 0..5
JSRT_COUNTS = (93, 25, 29, 50, 38, 12)
JSRT_ACCURACY = (0.809, 0.996, 0.926, 0.757, 0.547, 0.296)

PNEUMONIA_SENSITIVITY = (0.33, 0.777)
PNEUMONIA_SPECIFICITY = (0.588, 0.94)


def derive_seed(*keys) -> int:
    """Deterministic 32-bit seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def _model(reliabilities, types, d, prior, seed_keys, **meta):
    truth = sample_truth(d, prior, seed=derive_seed(*seed_keys, 0))
    return TwoTypeModel(np.atleast_2d(reliabilities), types, truth, seed=derive_seed(*seed_keys, 1), meta=meta)


def _cos(a, b) -> float:
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


# -- phase transition ---------------------------------------------------------

def phase_transition_reliabilities(n=50, easy=(0.47, 0.77), hard=(0.25, 0.45), anchors=4, anchor_values=(0.95, 0.85)):
    """Base entries of ``r1`` and ``r2``, sorted ascending.

    Each vector has ``anchors`` entries equal to its anchor value (clearly the
    strongest workers, all reliable) and ``n - anchors`` magnitudes evenly spaced
    over ``easy`` (``hard``) with every other one negated, starting with the
    smallest. The anchors fix the sign of each type; the mixed signs let a
    reordering of ``r2`` sweep its angle to ``r1`` over most of ``(0, pi)``.
    """
    if not 0 <= anchors < n:
        raise DataError("anchors must lie in [0, n)")

    def build(lo, hi, anchor):
        m = np.linspace(lo, hi, n - anchors)
        m[::2] *= -1.0
        return np.sort(np.concatenate([m, np.full(anchors, float(anchor))]))

    r1, r2 = build(*easy, anchor_values[0]), build(*hard, anchor_values[1])
    if np.any(np.abs(r1) >= 1) or np.any(np.abs(r2) >= 1):
        raise DataError("phase transition reliabilities must lie inside (-1, 1)")
    return r1, r2


def _arrange_to_angle(r1, r2, target, tol, max_moves, rng):
    """Reorder ``r2`` so that ``angle(r1, r2)`` is within ``tol`` (in cosine) of ``target``.

    Starts from the aligned ordering (both sorted) and applies random swaps,
    keeping a swap when it brings ``r1 . r2`` closer to the goal.
    """
    n = r1.shape[0]
    nrm = np.linalg.norm(r1) * np.linalg.norm(r2)
    goal = math.cos(target) * nrm
    cur = np.empty(n)
    cur[np.argsort(r1, kind="stable")] = np.sort(r2)
    dot = float(r1 @ cur)
    moves = 0
    while abs(dot - goal) > tol * nrm and moves < max_moves:
        moves += 1
        i, j = rng.integers(0, n, size=2)
        if i == j:
            continue
        delta = (r1[i] - r1[j]) * (cur[j] - cur[i])
        if abs(dot + delta - goal) < abs(dot - goal):
            cur[i], cur[j] = cur[j], cur[i]
            dot += delta
    return cur


def gen_phase_transition(params: dict, trial: int = 0, base_seed: int = 0):
    """One two-type model per target angle between ``r1`` and ``r2``.

    ``r1`` is the same for every angle and ``r2`` is a permutation of one fixed
    set of entries, so only the pairing of easy and hard reliabilities changes.
    Keys of ``params``: ``n``, ``d``, ``angles_deg``, ``easy`` and ``hard``
    (magnitude ranges), ``anchors`` and ``anchor_values``, ``angle_tol``
    (tolerance on the cosine), ``max_moves``, ``prior``.
    """
    n = int(params.get("n", 50))
    d = int(params.get("d", 200))
    angles = [math.radians(a) for a in params.get("angles_deg", [30, 60, 90, 120, 150])]
    tol = float(params.get("angle_tol", 0.005))
    max_moves = int(params.get("max_moves", 200_000))
    prior = float(params.get("prior", 0.5))
    r1, r2 = phase_transition_reliabilities(
        n, params.get("easy", (0.47, 0.77)), params.get("hard", (0.25, 0.45)),
        int(params.get("anchors", 4)), params.get("anchor_values", (0.95, 0.85)),
    )
    norm_gap = float(r1 @ r1 - r2 @ r2)
    out = []
    for c, target in enumerate(angles):
        if not 0 < target < math.pi:
            raise DataError("angles must lie in (0, 180) degrees")
        rng = make_rng(derive_seed(base_seed, 9000 + c))
        r2c = _arrange_to_angle(r1, r2, target, tol, max_moves, rng)
        achieved = math.acos(max(-1.0, min(1.0, _cos(r1, r2c))))
        miss = abs(math.cos(achieved) - math.cos(target)) > tol
        label = f"angle={math.degrees(target):.1f}"
        model = _model(
            np.vstack([r1, r2c]), equal_split_types(d), d, prior, (base_seed, trial, c),
            target_angle=target, achieved_angle=achieved, angle_miss=miss, norm_gap=norm_gap,
        )
        out.append((label, model))
    return out


# -- clustering tightness -----------------------------------------------------

def gen_cluster_tightness(params: dict, trial: int = 0, base_seed: int = 0):
    """Constant-magnitude reliability pairs covering a grid of separabilities.

    ``params["grid"]`` is a list of ``[easy, hard, flip_fraction]``: every worker
    has reliability ``easy`` on type-1 tasks and ``+-hard`` on type-2 tasks, with
    the first ``round(flip_fraction * n)`` hard entries negated.
    """
    n = int(params.get("n", 50))
    d = int(params.get("d", 200))
    prior = float(params.get("prior", 0.5))
    out = []
    for c, (easy, hard, flip) in enumerate(params["grid"]):
        r1 = np.full(n, float(easy))
        r2 = np.full(n, float(hard))
        r2[: int(round(flip * n))] *= -1
        label = f"easy={easy:g},hard={hard:g},flip={flip:g}"
        out.append((label, _model(np.vstack([r1, r2]), equal_split_types(d), d, prior, (base_seed, trial, c))))
    return out


# -- pneumonia ----------------------------------------------------------------

def gen_pneumonia(params: dict, trial: int = 0, base_seed: int = 0):
    """Radiologist crowds with accuracies drawn from reported sensitivity/specificity ranges.

    ``mode="type_accuracy"``: half the tasks are type 1 (sensitivity as accuracy),
    half type 2 (specificity). ``mode="class_conditional"``: the type of a task is
    its true class, positives use the sensitivity vector and negatives the
    specificity vector. One configuration per entry of ``n_workers``.
    """
    mode = params.get("mode", "type_accuracy")
    if mode not in ("type_accuracy", "class_conditional"):
        raise DataError("mode must be 'type_accuracy' or 'class_conditional'")
    d = int(params.get("d", 200))
    prior = float(params.get("prior", 0.5))
    sens = params.get("sensitivity", PNEUMONIA_SENSITIVITY)
    spec = params.get("specificity", PNEUMONIA_SPECIFICITY)
    out = []
    for c, n in enumerate(params.get("n_workers", list(range(3, 42, 2)))):
        keys = (base_seed, trial, c)
        rng = make_rng(derive_seed(*keys, 2))
        acc1 = rng.uniform(sens[0], sens[1], size=n)
        acc2 = rng.uniform(spec[0], spec[1], size=n)
        R = np.vstack([2 * acc1 - 1, 2 * acc2 - 1])
        truth = sample_truth(d, prior, seed=derive_seed(*keys, 0))
        if mode == "type_accuracy":
            types = equal_split_types(d)
        else:
            types = np.where(truth == 1, 1, 2)
        model = TwoTypeModel(R, types, truth, seed=derive_seed(*keys, 1), meta={"mode": mode, "n": n})
        out.append((f"n={n}", model))
    return out


# -- JSRT ---------------------------------------------------------------------

def jsrt_types(variant: str):
    """Accuracies and task counts per type for JSRT-2 or JSRT-6.

    JSRT-2 pools the three most accurate subtlety levels into the easy type and
    the three least accurate into the hard type; each pooled accuracy is the
    task-count-weighted mean of its members.
    """
    acc = np.array(JSRT_ACCURACY)
    cnt = np.array(JSRT_COUNTS)
    if variant == "JSRT6":
        return acc, cnt
    if variant != "JSRT2":
        raise DataError("variant must be JSRT2 or JSRT6")
    order = np.argsort(-acc, kind="stable")
    easy, hard = order[:3], order[3:]
    accs = np.array([np.average(acc[easy], weights=cnt[easy]), np.average(acc[hard], weights=cnt[hard])])
    return accs, np.array([cnt[easy].sum(), cnt[hard].sum()])


def gen_jsrt(params: dict, trial: int = 0, base_seed: int = 0):
    """Radiologist crowd on the JSRT nodule database (20 readers by default).

    Per type ``k`` and worker, ``(1 + r) / 2 ~ U(acc_k - sigma, acc_k + sigma)``,
    truncated to ``(0, 1)``. JSRT-6 types follow subtlety order (type ``k`` is
    subtlety ``k - 1``); JSRT-2 type 1 is the easy pool.
    """
    variant = params.get("variant", "JSRT2")
    n = int(params.get("n", 20))
    sigma = float(params.get("sigma", 0.05))
    prior = float(params.get("prior", 0.5))
    accs, counts = jsrt_types(variant)
    if np.any(accs - sigma <= 0) or np.any(accs + sigma >= 1):
        warnings.warn("JSRT accuracy support leaves (0, 1); truncating", RuntimeWarning, stacklevel=2)
    keys = (base_seed, trial, 0)
    rng = make_rng(derive_seed(*keys, 2))
    P = np.vstack([rng.uniform(a - sigma, a + sigma, size=n) for a in accs])
    P = np.clip(P, 1e-6, 1 - 1e-6)
    types = np.repeat(np.arange(1, len(accs) + 1), counts)
    d = int(counts.sum())
    model = _model(2 * P - 1, types, d, prior, keys, variant=variant)
    return [(variant, model)]
