"""Group models with geodesic normal forms and exact word lengths.

Every model represents elements by a canonical normal form (a hashable
tuple), so equal group elements compare equal bitwise and the word length
of the stored form is the geodesic length for the model's symmetric
generating set.  Supported families:

* ``FreeGroup(rank)``           -- reduced words, length = letter count
* ``FreeProductCyclic(orders)`` -- Z/m1 * ... * Z/mN, syllable normal form,
  a syllable g^e contributes min(e, m-e) to the length
* ``Raag(vertices, edges)``     -- right-angled Artin group, shortlex pile
  normal form (geodesic, lexicographically least in its commutation class)
* ``ZPower(dim)``               -- Z^D with the l1 metric, integer vectors
* ``DirectProduct(left, right)``-- l1 product, length is the sum of factor
  lengths

Letters are encoded as small integers: generator i contributes the codes
2*i (positive) and 2*i + 1 (inverse).  The fixed generator order used for
every canonical/shortlex decision is a < a^-1 < b < b^-1 < ...  Elements
print as case-coded words ("abA" = a b a^-1, "e" = identity); product
elements print as "(left,right)".

All models and elements are immutable values; every operation is pure.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

from .errors import SpecParseError

_LETTERS = "abcdefghijklmnopqrstuvwxyz"
MAX_GENERATORS = 26  # single-letter names; desk-scale models never need more


def _code(gen: int, sign: int) -> int:
    return 2 * gen + (0 if sign > 0 else 1)


def _letter_name(code: int) -> str:
    name = _LETTERS[code >> 1]
    return name if code % 2 == 0 else name.upper()


class GroupModel:
    """Shared helpers; concrete models implement the primitive operations."""

    def identity(self):
        raise NotImplementedError

    def generators(self) -> list:
        """Canonical symmetric generating set (inverses included, involutions
        listed once), in generator-code order."""
        raise NotImplementedError

    def multiply(self, x, y):
        raise NotImplementedError

    def invert(self, x):
        raise NotImplementedError

    def length(self, x) -> int:
        raise NotImplementedError

    def letters(self, x) -> tuple:
        """Canonical geodesic spelling of x as a tuple of letter codes."""
        raise NotImplementedError

    def spec(self) -> str:
        """Canonical spec string; ``parse_spec(model.spec()) == model``."""
        raise NotImplementedError

    def sort_key(self, x):
        """Shortlex key on normal forms; the package-wide canonical order."""
        return (self.length(x), self.letters(x))

    def distance(self, x, y) -> int:
        """Left-invariant word metric d(x, y) = length(x^-1 y)."""
        return self.length(self.multiply(self.invert(x), y))

    def format_element(self, x) -> str:
        if self.length(x) == 0:
            return "e"
        return "".join(_letter_name(c) for c in self.letters(x))

    def parse_element(self, text: str):
        """Parse a case-coded word; the result is normalized on the way in."""
        text = text.strip()
        if text == "e" or text == "":
            return self.identity()
        out = self.identity()
        gens = {self.format_element(g): g for g in self.generators()}
        # involutions print as lowercase only; accept the uppercase too
        for g in self.generators():
            w = self.letters(g)
            if len(w) == 1:
                gens.setdefault(_letter_name(w[0] ^ 1), self.invert(g))
        for ch in text:
            if ch not in gens:
                raise ValueError(f"unknown letter {ch!r} for model {self.spec()!r}")
            out = self.multiply(out, gens[ch])
        return out

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        return hash((type(self).__name__, self._key()))

    def _key(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.spec()!r})"


class FreeGroup(GroupModel):
    """Free group of the given rank; elements are freely reduced code tuples."""

    def __init__(self, rank: int):
        if not 1 <= rank <= MAX_GENERATORS:
            raise ValueError(f"free rank must be in [1, {MAX_GENERATORS}], got {rank}")
        self.rank = rank

    def _key(self):
        return self.rank

    def spec(self) -> str:
        return f"free rank={self.rank}"

    def identity(self):
        return ()

    def generators(self):
        return [(c,) for c in range(2 * self.rank)]

    def multiply(self, x, y):
        i, j, m = len(x), 0, len(y)
        while i and j < m and x[i - 1] == y[j] ^ 1:
            i -= 1
            j += 1
        return x[:i] + y[j:]

    def invert(self, x):
        return tuple(c ^ 1 for c in reversed(x))

    def length(self, x):
        return len(x)

    def letters(self, x):
        return x


class ZPower(GroupModel):
    """Z^D with the l1 word metric; elements are integer vectors."""

    def __init__(self, dim: int):
        if not 1 <= dim <= MAX_GENERATORS:
            raise ValueError(f"zd dim must be in [1, {MAX_GENERATORS}], got {dim}")
        self.dim = dim

    def _key(self):
        return self.dim

    def spec(self) -> str:
        return f"zd dim={self.dim}"

    def identity(self):
        return (0,) * self.dim

    def generators(self):
        gens = []
        for i in range(self.dim):
            for sign in (1, -1):
                v = [0] * self.dim
                v[i] = sign
                gens.append(tuple(v))
        return gens

    def multiply(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def invert(self, x):
        return tuple(-a for a in x)

    def length(self, x):
        return sum(abs(a) for a in x)

    def letters(self, x):
        out = []
        for i, a in enumerate(x):
            out.extend([_code(i, 1 if a > 0 else -1)] * abs(a))
        return tuple(out)


class FreeProductCyclic(GroupModel):
    """Free product Z/m1 * ... * Z/mN with generating set {g_i^(+-1)}.

    Elements are alternating syllable tuples ((factor, exponent), ...) with
    1 <= exponent < order[factor] and adjacent factors distinct.  Geodesics
    concatenate syllable geodesics, so length(g_i^e) = min(e, m_i - e).
    """

    def __init__(self, orders: Sequence[int]):
        orders = tuple(orders)
        if not orders or len(orders) > MAX_GENERATORS:
            raise ValueError("cyclicfreeproduct needs between 1 and 26 factors")
        for m in orders:
            if m < 2:
                raise ValueError(f"cyclic order must be >= 2, got {m}")
        self.orders = orders

    def _key(self):
        return self.orders

    def spec(self) -> str:
        return "cyclicfreeproduct orders=" + ",".join(str(m) for m in self.orders)

    def identity(self):
        return ()

    def generators(self):
        gens = []
        for f, m in enumerate(self.orders):
            gens.append(((f, 1),))
            if m > 2:  # for m = 2 the generator is an involution
                gens.append(((f, m - 1),))
        return gens

    def multiply(self, x, y):
        stack = list(x)
        for f, e in y:
            if stack and stack[-1][0] == f:
                e = (stack[-1][1] + e) % self.orders[f]
                stack.pop()
                if e:
                    stack.append((f, e))
            else:
                stack.append((f, e))
        return tuple(stack)

    def invert(self, x):
        return tuple((f, self.orders[f] - e) for f, e in reversed(x))

    def length(self, x):
        return sum(min(e, self.orders[f] - e) for f, e in x)

    def letters(self, x):
        out = []
        for f, e in x:
            m = self.orders[f]
            if e <= m - e:
                out.extend([_code(f, 1)] * e)
            else:
                out.extend([_code(f, -1)] * (m - e))
        return tuple(out)


class Raag(GroupModel):
    """Right-angled Artin group of a finite simple graph.

    Normal form: the pile (stacking) representation of the commutation
    class.  Piling cancels every x x^-1 pair that commuting moves can make
    adjacent, so the pile content spells a geodesic word; depiling always
    emits the least available generator, which linearizes the commutation
    class lexicographically least under the order a < a^-1 < b < b^-1 < ...
    """

    def __init__(self, vertices: Sequence[str], edges):
        vertices = tuple(vertices)
        if not vertices or len(vertices) > MAX_GENERATORS:
            raise ValueError("raag needs between 1 and 26 vertices")
        if len(set(vertices)) != len(vertices):
            raise ValueError("duplicate raag vertex")
        for v in vertices:
            if len(v) != 1 or v not in _LETTERS:
                raise ValueError(f"raag vertex must be a single lowercase letter, got {v!r}")
        self.vertices = vertices
        vindex = {v: k for k, v in enumerate(vertices)}
        norm = set()
        for a, b in edges:
            ia, ib = vindex.get(a), vindex.get(b)
            if ia is None or ib is None:
                missing = a if ia is None else b
                raise ValueError(f"edge references undeclared vertex {missing!r}")
            if ia == ib:
                raise ValueError(f"loop edge {a}-{b} not allowed (graph must be simple)")
            if (min(ia, ib), max(ia, ib)) in norm:
                raise ValueError(f"duplicate edge {a}-{b}")
            norm.add((min(ia, ib), max(ia, ib)))
        self.edges = frozenset(norm)
        n = len(vertices)
        adj = [set() for _ in range(n)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        # vertices whose letters do NOT commute with v (v itself excluded:
        # same-generator letters need no markers, they sit on the same pile)
        self._noncomm = [tuple(u for u in range(n) if u != v and u not in adj[v])
                         for v in range(n)]

    def _key(self):
        return (self.vertices, self.edges)

    def spec(self) -> str:
        edges = ",".join(f"{self.vertices[a]}-{self.vertices[b]}"
                         for a, b in sorted(self.edges))
        return f"raag vertices={','.join(self.vertices)} edges={edges}"

    def identity(self):
        return ()

    def generators(self):
        return [(c,) for c in range(2 * len(self.vertices))]

    def _normal_form(self, codes):
        piles = [deque() for _ in self.vertices]
        count = 0
        for c in codes:
            v, sign = c >> 1, (1 if c % 2 == 0 else -1)
            pile = piles[v]
            if pile and pile[-1] == -sign:
                # the previous v-letter is still on top, so only letters
                # commuting with v arrived in between: the pair cancels
                pile.pop()
                for u in self._noncomm[v]:
                    piles[u].pop()
                count -= 1
            else:
                pile.append(sign)
                for u in self._noncomm[v]:
                    piles[u].append(0)
                count += 1
        out = []
        while count:
            v = next(u for u in range(len(piles)) if piles[u] and piles[u][0])
            sign = piles[v].popleft()
            out.append(_code(v, sign))
            for u in self._noncomm[v]:
                piles[u].popleft()
            count -= 1
        return tuple(out)

    def multiply(self, x, y):
        return self._normal_form(x + y)

    def invert(self, x):
        return self._normal_form(tuple(c ^ 1 for c in reversed(x)))

    def length(self, x):
        return len(x)

    def letters(self, x):
        return x


class DirectProduct(GroupModel):
    """l1 (direct) product: elements are pairs, lengths add."""

    def __init__(self, left: GroupModel, right: GroupModel):
        self.left = left
        self.right = right

    def _key(self):
        return (self.left, self.right)

    def spec(self) -> str:
        return f"product ({self.left.spec()}) ({self.right.spec()})"

    def identity(self):
        return (self.left.identity(), self.right.identity())

    def generators(self):
        el, er = self.left.identity(), self.right.identity()
        return ([(g, er) for g in self.left.generators()]
                + [(el, g) for g in self.right.generators()])

    def multiply(self, x, y):
        return (self.left.multiply(x[0], y[0]), self.right.multiply(x[1], y[1]))

    def invert(self, x):
        return (self.left.invert(x[0]), self.right.invert(x[1]))

    def length(self, x):
        return self.left.length(x[0]) + self.right.length(x[1])

    def letters(self, x):
        offset = 2 * _generator_span(self.left)
        return self.left.letters(x[0]) + tuple(c + offset for c in self.right.letters(x[1]))

    def format_element(self, x) -> str:
        return f"({self.left.format_element(x[0])},{self.right.format_element(x[1])})"

    def parse_element(self, text: str):
        text = text.strip()
        if text == "e":
            return self.identity()
        if not (text.startswith("(") and text.endswith(")")):
            raise ValueError(f"product element must look like (u,v), got {text!r}")
        inner = text[1:-1]
        depth = 0
        for k, ch in enumerate(inner):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                return (self.left.parse_element(inner[:k]),
                        self.right.parse_element(inner[k + 1:]))
        raise ValueError(f"missing top-level comma in product element {text!r}")


def _generator_span(model: GroupModel) -> int:
    if isinstance(model, DirectProduct):
        return _generator_span(model.left) + _generator_span(model.right)
    if isinstance(model, FreeGroup):
        return model.rank
    if isinstance(model, ZPower):
        return model.dim
    if isinstance(model, FreeProductCyclic):
        return len(model.orders)
    if isinstance(model, Raag):
        return len(model.vertices)
    raise TypeError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# group-spec grammar
#
#   free rank=<k>
#   cyclicfreeproduct orders=<m1>,<m2>[,...]
#   raag vertices=<v1>,... edges=<vi>-<vj>,...
#   zd dim=<D>
#   product (<spec>) (<spec>)
# ---------------------------------------------------------------------------

class _Cursor:
    def __init__(self, text: str, pos: int = 0):
        self.text = text
        self.pos = pos

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def fail(self, message: str):
        raise SpecParseError(message, self.pos)

    def word(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        if self.pos == start:
            self.fail("expected a word")
        return self.text[start:self.pos]

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            self.fail(f"expected {ch!r}")
        self.pos += 1

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            self.fail("expected an integer")
        return int(self.text[start:self.pos])

    def key(self, name: str):
        self.skip_ws()
        at = self.pos
        got = self.word()
        if got != name:
            self.pos = at
            self.fail(f"expected {name}=...")
        self.expect("=")

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def _parse_model(cur: _Cursor) -> GroupModel:
    cur.skip_ws()
    at = cur.pos
    variant = cur.word()
    try:
        if variant == "free":
            cur.key("rank")
            return FreeGroup(cur.integer())
        if variant == "zd":
            cur.key("dim")
            return ZPower(cur.integer())
        if variant == "cyclicfreeproduct":
            cur.key("orders")
            orders = [cur.integer()]
            while not cur.at_end() and cur.text[cur.pos] == ",":
                cur.expect(",")
                orders.append(cur.integer())
            return FreeProductCyclic(orders)
        if variant == "raag":
            cur.key("vertices")
            vertices = [cur.word()]
            while not cur.at_end() and cur.text[cur.pos] == ",":
                cur.expect(",")
                vertices.append(cur.word())
            cur.key("edges")
            edges = []
            cur.skip_ws()
            while not cur.at_end():
                a = cur.word()
                cur.expect("-")
                b = cur.word()
                edges.append((a, b))
                cur.skip_ws()
                if cur.at_end() or cur.text[cur.pos] != ",":
                    break
                cur.expect(",")
            return Raag(vertices, edges)
        if variant == "product":
            factors = []
            for _ in range(2):
                cur.expect("(")
                factors.append(_parse_model(cur))
                cur.expect(")")
            return DirectProduct(*factors)
    except ValueError as exc:
        raise SpecParseError(str(exc), at) from None
    cur.pos = at
    cur.fail(f"unknown variant {variant!r}")


def parse_spec(text: str) -> GroupModel:
    """Parse a one-line group specification (grammar in the module docstring).

    Raises SpecParseError with the position of the first offending token.
    """
    cur = _Cursor(text)
    model = _parse_model(cur)
    if not cur.at_end():
        cur.fail("trailing input after specification")
    return model
