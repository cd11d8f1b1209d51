"""Exact identity suites for metric derivatives on tree boundaries.

Three identities are checked with integer arithmetic only:

* geometric mean value: ``2 <g c1, g c2> = -e_g(c1) - e_g(c2) + 2 <c1, c2>``
  written in exponents (``D_g = exp(-epsilon e_g)``),
* cocycle: ``e_{gh}(c) = e_g(h c) + e_h(c)``,
* change of variables: ``sum_c D_g(c)^D nu(c) = 1``.

Group elements are enumerated up to the signed-permutation automorphisms of
F_k (relabel generators, swap a generator with its inverse). Such an
automorphism maps words, cylinders, Gromov products and images bijectively,
so an identity holds for ``g`` iff it holds for every element of the orbit
of ``g``; checking one representative per orbit covers every ``g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .word_tree import ReducedWord, TreeBoundarySpace, _word_array, derivative_reference, words_up_to


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: int = 0
    examples: list[str] = field(default_factory=list)
    sampled: bool = False

    @property
    def passed(self) -> bool:
        return self.checked > 0 and self.failures == 0

    def record(self, checked: int, failures: int, example: str | None = None) -> None:
        self.checked += int(checked)
        self.failures += int(failures)
        if failures and example and len(self.examples) < 5:
            self.examples.append(example)


def canonical_form(g: ReducedWord) -> ReducedWord:
    """Representative of the orbit of ``g`` under signed generator permutations."""
    relabel: dict[int, int] = {}
    out = []
    for x in g.letters:
        gen, sign = x >> 1, x & 1
        if gen not in relabel:
            # first occurrence becomes the next positive generator
            relabel[gen] = (len(relabel) << 1) | sign
        base = relabel[gen]
        out.append((base & ~1) | ((base & 1) ^ sign))
    return ReducedWord(tuple(out))


def orbit_representatives(k: int, max_length: int) -> list[ReducedWord]:
    out = []
    for n in range(max_length + 1):
        arr = _word_array(k, n)
        out.extend(ReducedWord(tuple(int(x) for x in row)) for row in arr[_canonical_mask(arr)])
    return out


def _cp_with(letters: np.ndarray, ref: tuple[int, ...], cap: int | None = None) -> np.ndarray:
    """Common prefix length of every row with ``ref``, capped at ``cap``."""
    width = min(letters.shape[1], len(ref))
    if cap is not None:
        width = min(width, cap)
    if width == 0:
        return np.zeros(len(letters), dtype=np.int64)
    eq = letters[:, :width] == np.asarray(ref[:width], dtype=letters.dtype)[None, :]
    return np.cumprod(eq, axis=1).sum(axis=1)


def _pairwise_cp(letters: np.ndarray) -> np.ndarray:
    n = len(letters)
    out = np.zeros((n, n), dtype=np.int8)
    alive = np.ones((n, n), dtype=bool)
    eq = np.empty((n, n), dtype=bool)
    for col in range(letters.shape[1]):
        c = letters[:, col]
        np.equal(c[:, None], c[None, :], out=eq)
        alive &= eq
        out += alive
    return out


def _canonical_mask(letters: np.ndarray) -> np.ndarray:
    """Rows equal to their own :func:`canonical_form`."""
    if letters.shape[1] == 0:
        return np.ones(len(letters), dtype=bool)
    gens = letters.astype(np.int64) >> 1
    signs = letters & 1
    seen_max = np.maximum.accumulate(gens, axis=1)
    prev_max = np.hstack([np.full((len(letters), 1), -1), seen_max[:, :-1]])
    new = gens > prev_max
    return np.all(gens <= prev_max + 1, axis=1) & ~np.any(new & (signs == 1), axis=1)


def _images(g: ReducedWord, letters: np.ndarray, lengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Padded letters and lengths of ``g . w`` for every row ``w`` (with ``len(w) > |g|``)."""
    L = len(g)
    n_rows, width = letters.shape
    cancel = _cp_with(letters, g.inverse().letters, cap=L)
    out_width = width + L
    out = np.full((n_rows, out_width), -1, dtype=np.int8)
    glet = np.asarray(g.letters, dtype=np.int8)
    pos = np.arange(out_width)[None, :]
    keep = (L - cancel)[:, None]
    from_g = pos < keep
    src = pos - keep + cancel[:, None]
    valid = (~from_g) & (src < lengths[:, None])
    src_clipped = np.clip(src, 0, width - 1)
    gathered = np.take_along_axis(letters, src_clipped, axis=1)
    if L:
        out[from_g] = np.broadcast_to(glet[np.clip(pos, 0, L - 1)], from_g.shape)[from_g]
    out[valid] = gathered[valid]
    return out, lengths + L - 2 * cancel


def gmv_suite(
    space: TreeBoundarySpace,
    max_depth: int = 5,
    max_length: int = 3,
    orientation: str = "inverse",
    use_symmetry: bool = True,
) -> SuiteResult:
    """Geometric mean value identity over all disjoint same-depth cylinder pairs.

    Every depth ``n`` with ``|g| < n <= max_depth`` is covered. Pairs of mixed
    depth need no separate pass: replacing the shallower cylinder by one of its
    children leaves both sides of the identity unchanged.
    """
    result = SuiteResult("gmv_exact")
    elements = orbit_representatives(space.k, max_length) if use_symmetry else list(words_up_to(space.k, max_length))
    for n in range(1, max_depth + 1):
        letters = space.word_array(n)
        cp = _pairwise_cp(letters)
        disjoint = cp < n
        lengths = np.full(len(letters), n, dtype=np.int16)
        for g in elements:
            L = len(g)
            if L >= n:
                continue
            ref = derivative_reference(g, orientation).letters
            e = (L - 2 * _cp_with(letters, ref, cap=L)).astype(np.int8)
            img, _ = _images(g, letters, lengths)
            lhs = _pairwise_cp(img)
            lhs -= cp
            lhs *= 2
            ok = lhs == e[:, None] + e[None, :]
            bad = disjoint & ~ok
            n_bad = int(bad.sum())
            example = None
            if n_bad:
                i, j = map(int, np.argwhere(bad)[0])
                example = f"g={g} pair=({_fmt(letters[i])}, {_fmt(letters[j])})"
            result.record(int(disjoint.sum()), n_bad, example)
    return result


def cocycle_suite(
    space: TreeBoundarySpace,
    max_length: int = 4,
    orientation: str = "inverse",
    use_symmetry: bool = True,
    budget: int | None = 2_000_000,
    seed: int = 0,
) -> SuiteResult:
    """``e_{gh}(c) = e_g(h c) + e_h(c)`` on every cylinder of depth ``|g| + |h| + 1``.

    For each pair of lengths ``(|g|, |h|)`` at most ``budget`` (g, h, cell)
    triples are evaluated: when the full product is larger, each ``g`` is
    paired with a seeded sample of ``h`` (at least one ``(g, h)`` pair per
    length pair). ``budget=None`` checks everything. ``result.sampled``
    records whether any cut was made.
    """
    result = SuiteResult("cocycle_exact")
    rng = np.random.default_rng(seed)
    g_all = orbit_representatives(space.k, max_length) if use_symmetry else list(words_up_to(space.k, max_length))
    for a in range(max_length + 1):
        gs = [g for g in g_all if len(g) == a]
        for b in range(max_length + 1):
            depth = a + b + 1
            cells = space.word_array(depth)
            hs_all = space.words(b)
            pairs = [(g, h) for g in gs for h in hs_all]
            if budget is not None and len(pairs) * len(cells) > budget:
                keep = max(1, budget // len(cells))
                pairs = [pairs[i] for i in sorted(rng.choice(len(pairs), size=keep, replace=False))]
                result.sampled = True
            for g, h in pairs:
                bad = _cocycle_defects(space, g, h, cells, orientation)
                n_bad = int(bad.sum())
                example = f"g={g} h={h} c={_fmt(cells[int(np.argmax(bad))])}" if n_bad else None
                result.record(len(cells), n_bad, example)
    return result


def _cocycle_defects(
    space: TreeBoundarySpace, g: ReducedWord, h: ReducedWord, cells: np.ndarray, orientation: str
) -> np.ndarray:
    a, b = len(g), len(h)
    depth = cells.shape[1]
    e_h = space.derivative_exponents(h, depth, orientation)
    e_gh = space.derivative_exponents(g * h, depth, orientation)
    if a == 0:
        return e_gh != e_h
    # first |g| letters of h.c are h[:b-t] followed by c[t:], t = cancellation
    t = space.prefix_profile(depth, h.inverse(), cap=b).astype(np.int64)
    pos = np.arange(a)[None, :]
    keep = (b - t)[:, None]
    src = np.clip(pos + 2 * t[:, None] - b, 0, depth - 1)
    head = np.take_along_axis(cells, src, axis=1)
    if b:
        h_letters = np.asarray(h.letters, dtype=np.int8)[np.clip(np.arange(a), 0, b - 1)]
        head = np.where(pos < keep, h_letters[None, :], head)
    ref = np.full(a, -1, dtype=np.int8)
    ref_letters = derivative_reference(g, orientation).letters
    ref[: len(ref_letters)] = ref_letters
    cp = np.logical_and.accumulate(head == ref[None, :], axis=1).sum(axis=1)
    e_g = a - 2 * cp
    return e_gh != e_g + e_h


def change_of_variables_suite(
    space: TreeBoundarySpace,
    max_length: int = 8,
    orientation: str = "inverse",
    use_symmetry: bool = True,
    g_samples: int | None = None,
    seed: int = 0,
) -> SuiteResult:
    """``sum over depth-(|g|+1) cylinders of D_g^D nu = 1``, in exact rationals.

    ``g_samples`` caps the elements per length with a seeded sample drawn from
    all words of that length; ``None`` checks one element per symmetry orbit.

    At the default epsilon ``D_g^D = q^{-e}``; for other epsilon the same sum
    is taken with the exponent ``-e D`` folded into powers of ``exp(-epsilon)``,
    which is again ``q^{-e}`` because ``epsilon D = ln q``.
    """
    result = SuiteResult("change_of_var_exact")
    rng = np.random.default_rng(seed)
    q = space.q
    for n in range(max_length + 1):
        words = space.word_array(n)
        if g_samples is not None and len(words) > g_samples:
            rows = words[sorted(rng.choice(len(words), size=g_samples, replace=False))]
            gs = [ReducedWord(tuple(int(x) for x in row)) for row in rows]
            result.sampled = True
        else:
            rows = words[_canonical_mask(words)] if use_symmetry else words
            gs = [ReducedWord(tuple(int(x) for x in row)) for row in rows]
        nu = space.cell_measure(n + 1)
        totals: dict[tuple[int, ...], Fraction] = {}
        for g in gs:
            e = space.derivative_exponents(g, n + 1, orientation).astype(np.int64)
            counts = tuple(int(c) for c in np.bincount(e + n, minlength=2 * n + 1))
            if counts not in totals:
                totals[counts] = sum(
                    (c * (Fraction(q) ** (-(j - n))) for j, c in enumerate(counts) if c),
                    Fraction(0),
                ) * nu
            total = totals[counts]
            bad = total != 1
            result.record(1, int(bad), f"g={g} total={total}" if bad else None)
    return result


def _fmt(row: np.ndarray) -> str:
    return str(ReducedWord(tuple(int(x) for x in row if x >= 0)))
