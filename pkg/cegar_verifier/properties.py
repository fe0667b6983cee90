"""
Verification properties.

Property files hold one constraint per line over input variables x<k> and
output variables y<k>, with operators <=, >= and >; `#` starts a comment.
Input lines with one variable are bounds, input lines with several are
linear conjuncts. Every output line is one disjunct of the output formula.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import EPS_STRICT
from .errors import EncodingError, InvalidQueryError, PropertyError
from .models import LinearAtom, LinearConstraint, Query, RawProperty
from .network import Network


_OPERATORS = ("<=", ">=", ">")
_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TERM = re.compile(rf"\s*([+-])?\s*(?:({_NUMBER})\s*\*?\s*)?([A-Za-z_]\w*)\s*")
_VARIABLE = re.compile(r"^([xy])(\d+)$")
_CONJUNCTION = re.compile(r"\band\b|&&|\bor\b|\|\|", re.IGNORECASE)


def _parse_expression(text: str, line: int, path: Optional[str]) -> Tuple[str, Dict[int, float]]:
    """Parse `a x0 - x1 + 2*x3` into (kind, {index: coefficient})."""
    coefficients: Dict[int, float] = {}
    kind = None
    pos = 0
    text = text.strip()
    if not text:
        raise PropertyError("missing left-hand side", line, path)
    while pos < len(text):
        match = _TERM.match(text, pos)
        if match is None or match.end() == pos:
            raise PropertyError(f"cannot parse expression near {text[pos:]!r}", line, path)
        sign, number, name = match.groups()
        if pos > 0 and sign is None:
            raise PropertyError(f"missing operator before {name!r}", line, path)
        var = _VARIABLE.match(name)
        if var is None:
            raise PropertyError(f"unknown variable name {name!r}", line, path)
        if kind is not None and var.group(1) != kind:
            raise PropertyError("a constraint cannot mix input and output variables", line, path)
        kind = var.group(1)
        value = float(number) if number else 1.0
        if sign == "-":
            value = -value
        index = int(var.group(2))
        coefficients[index] = coefficients.get(index, 0.0) + value
        pos = match.end()
    return kind, coefficients


def parse_property(
    text: Union[str, bytes],
    num_inputs: Optional[int] = None,
    path: Optional[str] = None,
    num_outputs: Optional[int] = None,
) -> RawProperty:
    """
    Parse property text; every input must end up with both bounds.

    Output atoms are strict whatever their operator: `y0 - y1 >= c` and
    `y0 - y1 > c` both mean y0 - y1 > c, and `<=` means <.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise PropertyError(f"not UTF-8 text (byte {e.start})", path=path) from None

    lower: Dict[int, float] = {}
    upper: Dict[int, float] = {}
    conjuncts: List[Tuple[Dict[int, float], float]] = []
    atoms: List[LinearAtom] = []
    last_line = None

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        last_line = number
        if _CONJUNCTION.search(line):
            raise PropertyError("conjunctions of output atoms are not supported; write one disjunct per line", number, path)
        operator = next((op for op in _OPERATORS if op in line), None)
        if operator is None:
            raise PropertyError("expected one of <=, >=, >", number, path)
        lhs, rhs_text = line.split(operator, 1)
        try:
            rhs = float(rhs_text.strip())
        except ValueError:
            raise PropertyError(f"right-hand side must be a number, got {rhs_text.strip()!r}", number, path) from None
        if not np.isfinite(rhs):
            raise PropertyError("right-hand side must be finite", number, path)
        kind, coefficients = _parse_expression(lhs, number, path)

        if kind == "y":
            if num_outputs is not None and any(k >= num_outputs for k in coefficients):
                bad = max(coefficients)
                raise PropertyError(f"unknown variable y{bad} (network has {num_outputs} outputs)", number, path)
            if operator == "<=":
                atoms.append(LinearAtom({k: -c for k, c in coefficients.items()}, rhs))
            else:
                atoms.append(LinearAtom(dict(coefficients), -rhs))
            continue

        if num_inputs is not None and any(k >= num_inputs for k in coefficients):
            bad = max(coefficients)
            raise PropertyError(f"unknown variable x{bad} (network has {num_inputs} inputs)", number, path)
        # normalise to sum(a x) <= b
        if operator != "<=":
            coefficients = {k: -c for k, c in coefficients.items()}
            rhs = -rhs
        nonzero = {k: c for k, c in coefficients.items() if c != 0.0}
        if len(nonzero) == 1:
            (index, coeff), = nonzero.items()
            bound = rhs / coeff
            if coeff > 0:
                upper[index] = min(upper.get(index, np.inf), bound)
            else:
                lower[index] = max(lower.get(index, -np.inf), bound)
        elif nonzero:
            conjuncts.append((nonzero, rhs))
        elif rhs < 0:
            raise PropertyError("constraint is trivially false", number, path)

    seen = set(lower) | set(upper) | {k for c, _ in conjuncts for k in c}
    size = num_inputs if num_inputs is not None else (max(seen) + 1 if seen else 0)
    if size == 0:
        raise PropertyError("property constrains no input variable", last_line, path)
    for k in range(size):
        if k not in lower or k not in upper:
            raise PropertyError(f"input x{k} unbounded", None, path)
        if lower[k] > upper[k]:
            raise PropertyError(f"input x{k} has lower bound {lower[k]} above upper bound {upper[k]}", None, path)
    if not atoms:
        raise PropertyError("property has no output atom", last_line, path)

    constraints = []
    for coefficients, rhs in conjuncts:
        vector = np.zeros(size)
        for k, c in coefficients.items():
            vector[k] = c
        constraints.append(LinearConstraint(vector, rhs))

    return RawProperty(
        input_lower=np.array([lower[k] for k in range(size)]),
        input_upper=np.array([upper[k] for k in range(size)]),
        input_constraints=constraints,
        output_atoms=atoms,
    )


def load_property(
    path: Union[str, Path],
    num_inputs: Optional[int] = None,
    num_outputs: Optional[int] = None,
) -> RawProperty:
    path = Path(path)
    return parse_property(path.read_bytes(), num_inputs=num_inputs, path=str(path), num_outputs=num_outputs)


# =============================================================================
# Encoding into the single-output form
# =============================================================================

def encode_output_property(net: Network, prop: RawProperty) -> Tuple[Network, Query]:
    """
    Reduce a disjunction of output atoms to one output z with property z > 0.

    Each atom l_k(y) > 0 becomes a hidden neuron t_k = ReLU(l_k(y)) and the new
    output is z = sum(t_k). Because y is affine in the last hidden layer, the
    atoms are folded into that affine map, so the original output layer is
    replaced by the t-layer and the weights of every earlier layer are kept.
    """
    if not prop.output_atoms:
        raise EncodingError("cannot encode an empty disjunction")
    if prop.input_size != net.input_size:
        raise EncodingError(f"property has {prop.input_size} inputs, network has {net.input_size}")
    m = net.output_size
    for atom in prop.output_atoms:
        bad = [k for k in atom.coefficients if not 0 <= k < m]
        if bad:
            raise EncodingError(f"output y{bad[0]} does not exist (network has {m} outputs)")

    atom_matrix = np.zeros((len(prop.output_atoms), m))
    constants = np.zeros(len(prop.output_atoms))
    for row, atom in enumerate(prop.output_atoms):
        for k, c in atom.coefficients.items():
            atom_matrix[row, k] = c
        constants[row] = atom.constant

    weights = list(net.weights[:-1])
    biases = list(net.biases[:-1])
    weights.append(atom_matrix @ net.weights[-1])
    biases.append(atom_matrix @ net.biases[-1] + constants)
    weights.append(np.ones((1, len(prop.output_atoms))))
    biases.append(np.zeros(1))

    query = Query(
        lower=prop.input_lower.copy(),
        upper=prop.input_upper.copy(),
        constraints=tuple(prop.input_constraints),
        threshold=0.0,
    )
    return Network(tuple(weights), tuple(biases)), query


def generate_robustness_query(
    net: Network,
    x0: Sequence[float],
    delta: float,
    better: int,
    than: int,
    input_bounds: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    eps_strict: float = EPS_STRICT,
) -> Tuple[Network, Query]:
    """
    L-infinity robustness query around x0.

    SAT means some x with |x - x0|_inf <= delta has y_than <= y_better, i.e.
    the advisory `better` loses its lead to `than`.
    """
    if better == than:
        raise InvalidQueryError("output indices i and j must differ")
    if delta <= 0:
        raise InvalidQueryError("delta must be positive")
    m = net.output_size
    if not (0 <= better < m and 0 <= than < m):
        raise InvalidQueryError(f"output indices must lie in 0..{m - 1}")
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (net.input_size,):
        raise InvalidQueryError(f"center must have {net.input_size} entries")

    lower = x0 - delta
    upper = x0 + delta
    if input_bounds is not None:
        bound_lo = np.asarray(input_bounds[0], dtype=np.float64)
        bound_hi = np.asarray(input_bounds[1], dtype=np.float64)
        if np.any(x0 < bound_lo) or np.any(x0 > bound_hi):
            raise InvalidQueryError("center lies outside the declared input bounds")
        lower = np.maximum(lower, bound_lo)
        upper = np.minimum(upper, bound_hi)

    atom = LinearAtom({better: 1.0, than: -1.0}, eps_strict)
    prop = RawProperty(input_lower=lower, input_upper=upper, output_atoms=[atom])
    return encode_output_property(net, prop)


def translate_to_origin(net: Network, query: Query) -> Tuple[Network, Query, np.ndarray]:
    """
    Re-anchor the input box at the origin: x = x' + lower with x' >= 0.

    The first layer's bias absorbs W_1 . lower and each conjunct's right-hand
    side drops a . lower. Returns the shifted network, shifted query and the
    offset to add back to witnesses.
    """
    offset = query.lower.copy()
    biases = list(net.biases)
    biases[0] = net.biases[0] + net.weights[0] @ offset
    shifted_net = Network(net.weights, tuple(biases), net.tags)
    shifted_query = Query(
        lower=np.zeros_like(offset),
        upper=query.upper - offset,
        constraints=tuple(
            LinearConstraint(c.coefficients, c.rhs - float(np.dot(c.coefficients, offset)))
            for c in query.constraints
        ),
        threshold=query.threshold,
    )
    return shifted_net, shifted_query, offset
