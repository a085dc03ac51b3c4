"""Signatures, first-order terms, ground substitutions and one-way matching.

Terms are immutable and hashable.  Applications cache their hash, size and
groundness at construction, so large terms can be used as set members and
dictionary keys without re-walking the tree.
"""

from types import MappingProxyType

from .errors import ParseError, SignatureError
from .syntax import Lexer

# Constructors mirroring the logical operators.  ``ob``, ``know`` and ``xknow``
# exist once per agent; agent 1 uses the bare name, agent i >= 2 appends i.
KD_SHARED = {"true": 0, "false": 0, "not": 1, "and": 2}
KD_PER_AGENT = ("ob", "know", "xknow")


def kd_name(kind, agent):
    if kind not in KD_PER_AGENT:
        raise ValueError(f"not a per-agent constructor: {kind}")
    if agent < 1:
        raise ValueError(f"agent index must be positive, got {agent}")
    return kind if agent == 1 else f"{kind}{agent}"


def kd_symbols(agents):
    """The constructor set for ``agents`` agents, as a name -> arity dict."""
    symbols = dict(KD_SHARED)
    for i in range(1, agents + 1):
        for kind in KD_PER_AGENT:
            symbols[kd_name(kind, i)] = 1
    return symbols


def parse_kd_name(name):
    """Inverse of :func:`kd_name`: returns ``(kind, agent)`` or ``None``."""
    for kind in KD_PER_AGENT:
        if name == kind:
            return kind, 1
        if name.startswith(kind):
            suffix = name[len(kind):]
            if suffix.isdigit() and not suffix.startswith("0") and int(suffix) >= 2:
                return kind, int(suffix)
    return None


def is_kd_symbol(name):
    return name in KD_SHARED or parse_kd_name(name) is not None


class Signature:
    """Operation symbols with fixed arities.

    ``agents`` records how many agents' logical constructors were injected by
    :meth:`with_kd`; it is 0 for a plain base signature.
    """

    __slots__ = ("_symbols", "agents")

    def __init__(self, symbols=None, agents=0):
        symbols = dict(symbols or {})
        for name, arity in symbols.items():
            if not isinstance(arity, int) or arity < 0:
                raise SignatureError(f"bad arity for {name}: {arity!r}")
        self._symbols = MappingProxyType(symbols)
        self.agents = agents

    @property
    def symbols(self):
        return self._symbols

    def __contains__(self, name):
        return name in self._symbols

    def __iter__(self):
        return iter(self._symbols)

    def __len__(self):
        return len(self._symbols)

    def __eq__(self, other):
        return (
            isinstance(other, Signature)
            and dict(self._symbols) == dict(other._symbols)
            and self.agents == other.agents
        )

    def __hash__(self):
        return hash((frozenset(self._symbols.items()), self.agents))

    def __repr__(self):
        inner = ", ".join(f"{k}/{v}" for k, v in sorted(self._symbols.items()))
        return f"Signature({inner}; agents={self.agents})"

    def arity(self, name):
        try:
            return self._symbols[name]
        except KeyError:
            raise SignatureError(f"unknown symbol {name!r}") from None

    def base(self):
        """The signature without any logical constructors."""
        if not self.agents:
            return self
        kd = kd_symbols(self.agents)
        return Signature({k: v for k, v in self._symbols.items() if k not in kd})

    def constants(self):
        return sorted(k for k, v in self._symbols.items() if v == 0)

    def with_kd(self, agents):
        """Extend a base signature with the constructors for ``agents`` agents."""
        base = self.base()
        kd = kd_symbols(agents)
        clash = sorted(set(base.symbols) & set(kd))
        if clash:
            raise SignatureError(f"symbols collide with reserved constructors: {', '.join(clash)}")
        merged = dict(base.symbols)
        merged.update(kd)
        return Signature(merged, agents)

    def merge(self, other):
        merged = dict(self._symbols)
        for name, arity in other.symbols.items():
            if merged.get(name, arity) != arity:
                raise SignatureError(
                    f"symbol {name!r} declared with arities {merged[name]} and {arity}"
                )
            merged[name] = arity
        return Signature(merged, max(self.agents, other.agents))

    def check(self, term):
        """Raise :class:`SignatureError` unless ``term`` is well formed here."""
        stack = [term]
        while stack:
            t = stack.pop()
            if isinstance(t, Var):
                continue
            arity = self.arity(t.symbol)
            if arity != len(t.args):
                raise SignatureError(
                    f"{t.symbol} expects {arity} argument(s), got {len(t.args)}"
                )
            stack.extend(t.args)
        return term


class Var:
    """A term variable, written ``?name``."""

    __slots__ = ("name", "_hash")
    ground = False
    size = 1

    def __init__(self, name):
        self.name = name
        self._hash = hash(("?", name))

    def __eq__(self, other):
        return self is other or (isinstance(other, Var) and self.name == other.name)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"?{self.name}"

    __str__ = __repr__


class App:
    """An application ``symbol(args...)``; constants have no arguments."""

    __slots__ = ("symbol", "args", "_hash", "ground", "size", "depth")

    def __init__(self, symbol, args=()):
        args = tuple(args)
        self.symbol = symbol
        self.args = args
        self._hash = hash((symbol, args))
        self.ground = all(a.ground for a in args)
        self.size = 1 + sum(a.size for a in args)
        self.depth = 1 + max((getattr(a, "depth", 1) for a in args), default=0)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, App) or self._hash != other._hash:
            return False
        return self.symbol == other.symbol and self.args == other.args

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return print_term(self)

    __str__ = __repr__

    def __lt__(self, other):
        return print_term(self) < print_term(other)


Term = (Var, App)


def const(name):
    return App(name, ())


def print_term(t):
    parts = []

    def walk(u):
        if isinstance(u, Var):
            parts.append("?" + u.name)
        elif not u.args:
            parts.append(u.symbol)
        else:
            parts.append(u.symbol)
            parts.append("(")
            for k, a in enumerate(u.args):
                if k:
                    parts.append(",")
                walk(a)
            parts.append(")")

    walk(t)
    return "".join(parts)


def term_key(t):
    """Deterministic sort key for terms."""
    return print_term(t)


class TermReader:
    """Recursive-descent reader for the term grammar.

    With ``sig=None`` symbols are accepted freely and their arities are
    recorded in ``inferred``; a symbol used with two arities is an error.
    """

    def __init__(self, lexer, sig=None, inferred=None, allow_vars=True):
        self.lx = lexer
        self.sig = sig
        self.inferred = {} if inferred is None else inferred
        self.allow_vars = allow_vars

    def read(self):
        lx = self.lx
        if lx.at("?"):
            qtok = lx.next()
            name = lx.expect_kind("ident", "variable name")
            if name.pos != qtok.pos + 1:
                raise lx.error("whitespace is not allowed after '?'", name)
            if not self.allow_vars:
                raise lx.error(f"variable ?{name.text} not allowed here (ground term expected)", qtok)
            return Var(name.text)
        tok = lx.expect_kind("ident", "term")
        args = []
        if lx.accept("("):
            args.append(self.read())
            while lx.accept(","):
                args.append(self.read())
            lx.expect(")")
        self._check_symbol(tok, len(args))
        return App(tok.text, args)

    def read_list(self, terminators=(";",)):
        """Comma separated terms; an empty list when the next token ends it."""
        lx = self.lx
        if lx.peek().kind == "eof" or any(lx.at(t) for t in terminators):
            return []
        out = [self.read()]
        while lx.accept(","):
            out.append(self.read())
        return out

    def _check_symbol(self, tok, nargs):
        name = tok.text
        if self.sig is not None:
            if name not in self.sig:
                raise ParseError(f"unknown symbol {name!r}", self.lx.text, tok.pos)
            arity = self.sig.arity(name)
            if arity != nargs:
                raise ParseError(
                    f"arity mismatch: {name}/{arity} applied to {nargs} argument(s)",
                    self.lx.text,
                    tok.pos,
                )
            return
        known = self.inferred.get(name)
        if known is None:
            kd = kd_symbols(1)
            parsed = parse_kd_name(name)
            expected = KD_SHARED.get(name) if parsed is None else 1
            if (parsed or name in kd) and expected != nargs:
                raise ParseError(
                    f"arity mismatch: {name}/{expected} applied to {nargs} argument(s)",
                    self.lx.text,
                    tok.pos,
                )
            self.inferred[name] = nargs
        elif known != nargs:
            raise ParseError(
                f"arity mismatch: {name}/{known} applied to {nargs} argument(s)",
                self.lx.text,
                tok.pos,
            )


def parse_term(text, sig=None, allow_vars=True):
    """Parse one term.  ``sig`` enables symbol and arity checking."""
    lx = Lexer(text)
    t = TermReader(lx, sig, allow_vars=allow_vars).read()
    lx.expect_eof()
    return t


def parse_terms(text, sig=None, allow_vars=True):
    """Parse a comma separated list of terms (possibly empty)."""
    lx = Lexer(text)
    out = TermReader(lx, sig, allow_vars=allow_vars).read_list(terminators=())
    lx.expect_eof()
    return out


def infer_signature(terms):
    """The smallest signature over which every term in ``terms`` is well formed."""
    symbols = {}
    for t in terms:
        for u in iter_subterms(t):
            if isinstance(u, App):
                if symbols.setdefault(u.symbol, len(u.args)) != len(u.args):
                    raise SignatureError(f"symbol {u.symbol!r} used with two arities")
    return Signature(symbols)


def variables(t):
    out = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            out.add(u.name)
        elif not u.ground:
            stack.extend(u.args)
    return out


def apply_substitution(t, rho):
    """Replace every variable of ``t`` bound in ``rho``; unbound ones remain."""
    if t.ground:
        return t
    if isinstance(t, Var):
        return rho.get(t.name, t)
    return App(t.symbol, [apply_substitution(a, rho) for a in t.args])


def match(pattern, subject, rho=None):
    """One-way matching of ``pattern`` against a ground ``subject``.

    Returns the minimal substitution (a new dict, extending ``rho`` if given)
    with ``apply_substitution(pattern, result) == subject``, or ``None``.
    Repeated variables must bind consistently.
    """
    out = dict(rho) if rho else {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if p.ground:
            if p != s:
                return None
            continue
        if isinstance(p, Var):
            bound = out.get(p.name)
            if bound is None:
                out[p.name] = s
            elif bound != s:
                return None
            continue
        if not isinstance(s, App) or p.symbol != s.symbol or len(p.args) != len(s.args):
            return None
        stack.extend(zip(p.args, s.args))
    return out


def iter_subterms(t):
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        if isinstance(u, App):
            stack.extend(u.args)


def subterms(t):
    """``t`` together with all of its descendants."""
    out = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if u in out:
            continue
        out.add(u)
        if isinstance(u, App):
            stack.extend(u.args)
    return out


def proper_subterms(t):
    out = set()
    if isinstance(t, App):
        for a in t.args:
            out |= subterms(a)
    return out


def size(t):
    """Number of symbols needed to write ``t`` (variables count as one)."""
    return t.size


def symbols_of(t):
    return {u.symbol for u in iter_subterms(t) if isinstance(u, App)}
