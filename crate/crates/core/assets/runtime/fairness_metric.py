"""Runtime imported by scripts generated with `fairspec gen`.

Self-contained: standard library only. Cell typing, row skipping, quantile
selectors and predicate semantics follow the fairspec engine so a generated
script and `fairspec eval` agree on every bundled fixture.
"""

import ast
import csv
import math
import re

__all__ = [
    "Top",
    "Bottom",
    "load_csv",
    "FairnessMetric",
    "FairnessError",
]

_DECIMAL = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


class FairnessError(Exception):
    kind = "FairnessError"


def _error(name):
    return type(name, (FairnessError,), {"kind": name})


EmptyCondition = _error("EmptyCondition")
DivisionByZero = _error("DivisionByZero")
UndefinedRatio = _error("UndefinedRatio")
MissingLabels = _error("MissingLabels")
DegenerateBenefit = _error("DegenerateBenefit")
InvalidLogarithm = _error("InvalidLogarithm")
NonFiniteValue = _error("NonFiniteValue")
TypeMismatch = _error("TypeMismatch")
MissingColumn = _error("MissingColumn")
EmptyColumn = _error("EmptyColumn")
CsvError = _error("CsvError")


class Top:
    """Values strictly above the nearest-rank quantile at `fraction`."""

    def __init__(self, fraction):
        self.fraction = fraction

    def __repr__(self):
        return "Top(%r)" % self.fraction


class Bottom:
    """Values strictly below the nearest-rank quantile at `1 - fraction`."""

    def __init__(self, fraction):
        self.fraction = fraction

    def __repr__(self):
        return "Bottom(%r)" % self.fraction


def parse_cell(raw):
    if raw == "":
        return None
    if _DECIMAL.fullmatch(raw):
        return float(raw)
    return raw


def load_csv(path):
    """Returns `{"header": [...], "rows": [[cell, ...], ...]}`."""
    with open(path, newline="", encoding="utf-8-sig") as f:
        records = [r for r in csv.reader(f) if r]
    if not records:
        raise CsvError("missing header row")
    header = records[0]
    for i, h in enumerate(header):
        if h.startswith("__"):
            raise CsvError("column name %r uses the reserved `__` prefix" % h)
        if h in header[:i]:
            raise CsvError("duplicate column %r" % h)
    rows = []
    for n, rec in enumerate(records[1:], start=2):
        if len(rec) != len(header):
            raise CsvError(
                "record %d: expected %d cells, found %d" % (n, len(header), len(rec))
            )
        rows.append([parse_cell(c) for c in rec])
    return {"header": header, "rows": rows}


def nearest_rank(p, n):
    x = p * n
    r = round(x)
    if abs(x - r) <= 1e-9 * max(n, 1):
        rank = r
    else:
        rank = math.ceil(x)
    return min(max(int(rank), 1), n)


def quantile_threshold(values, p):
    if not values:
        raise EmptyColumn("no values to take a quantile of")
    ordered = sorted(values)
    return ordered[nearest_rank(p, len(ordered)) - 1]


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _matcher(data, column, selector):
    idx = _column(data, column)
    if isinstance(selector, (Top, Bottom)):
        values = []
        for row in data["rows"]:
            cell = row[idx]
            if cell is None:
                continue
            if not _is_number(cell):
                raise TypeMismatch(
                    "column %s: relative selector needs numbers, found %r" % (column, cell)
                )
            values.append(cell)
        if isinstance(selector, Top):
            t = quantile_threshold(values, selector.fraction)
            return lambda c: _is_number(c) and c > t
        t = quantile_threshold(values, 1.0 - selector.fraction)
        return lambda c: _is_number(c) and c < t
    if _is_number(selector):
        return lambda c: _is_number(c) and c == selector
    return lambda c: isinstance(c, str) and c == selector


def _column(data, name):
    try:
        return data["header"].index(name)
    except ValueError:
        raise MissingColumn("column %r not found" % name) from None


def _group_items(group):
    return list(group.items()) if isinstance(group, dict) else list(group)


class _Expr:
    """Evaluates predicate and row-arithmetic strings in fairspec syntax."""

    _CMP = {
        ast.Eq: lambda o: o == 0,
        ast.NotEq: lambda o: o != 0,
        ast.Lt: lambda o: o < 0,
        ast.LtE: lambda o: o <= 0,
        ast.Gt: lambda o: o > 0,
        ast.GtE: lambda o: o >= 0,
    }

    def __init__(self, source):
        self.source = source
        self.tree = ast.parse(source, mode="eval").body

    def __str__(self):
        return self.source

    def test(self, row):
        return self._pred(self.tree, row)

    def value(self, row):
        return self._arith(self.tree, row)

    def _pred(self, node, row):
        if isinstance(node, ast.BoolOp):
            if isinstance(node.op, ast.And):
                return all(self._pred(v, row) for v in node.values)
            return any(self._pred(v, row) for v in node.values)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
            return not self._pred(node.operand, row)
        if isinstance(node, ast.Compare) and len(node.ops) == 1:
            name = node.left.id
            cell = self._lookup(name, row)
            lit = self._literal(node.comparators[0])
            op = type(node.ops[0])
            if cell is None:
                return False
            if _is_number(cell) and _is_number(lit):
                o = (cell > lit) - (cell < lit)
            elif isinstance(cell, str) and isinstance(lit, str):
                o = (cell > lit) - (cell < lit)
            elif op is ast.Eq:
                return False
            elif op is ast.NotEq:
                return True
            else:
                raise TypeMismatch("column %s: cannot order %r against %r" % (name, cell, lit))
            return self._CMP[op](o)
        raise ValueError("unsupported predicate: %s" % self.source)

    def _arith(self, node, row):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -self._arith(node.operand, row)
        if isinstance(node, ast.Name):
            cell = self._lookup(node.id, row)
            if not _is_number(cell):
                raise TypeMismatch("column %s: expected a number, found %r" % (node.id, cell))
            return cell
        if isinstance(node, ast.BinOp):
            lhs = self._arith(node.left, row)
            rhs = self._arith(node.right, row)
            if isinstance(node.op, ast.Add):
                return lhs + rhs
            if isinstance(node.op, ast.Sub):
                return lhs - rhs
            if isinstance(node.op, ast.Mult):
                return lhs * rhs
            if isinstance(node.op, ast.Div):
                if rhs == 0.0:
                    raise DivisionByZero("`%s` divides by zero" % self.source)
                return lhs / rhs
        raise ValueError("unsupported expression: %s" % self.source)

    @staticmethod
    def _literal(node):
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -float(node.operand.value)
        if isinstance(node.value, str):
            return node.value
        return float(node.value)

    @staticmethod
    def _lookup(name, row):
        try:
            return row[name]
        except KeyError:
            raise MissingColumn("column %r not found" % name) from None


class FairnessMetric:
    def __init__(
        self,
        data,
        dataset_unprivileged_group,
        dataset_privileged_group,
        ground_truth_label_name,
        predicted_label_name,
        dataset_positive_outcome,
        outcome_label_name=None,
        sensitive_values=None,
        required_columns=None,
    ):
        header = data["header"]
        outcome_label_name = outcome_label_name or predicted_label_name or ground_truth_label_name
        if required_columns is None:
            required_columns = [
                c
                for c in [predicted_label_name, ground_truth_label_name, outcome_label_name]
                if c
            ]
            for col, _ in _group_items(dataset_privileged_group) + _group_items(
                dataset_unprivileged_group
            ):
                if col not in required_columns:
                    required_columns.append(col)
        required = [_column(data, c) for c in required_columns]

        outcome_idx = _column(data, outcome_label_name)
        outcome = _matcher(data, outcome_label_name, dataset_positive_outcome)
        truth = None
        if ground_truth_label_name:
            truth_idx = _column(data, ground_truth_label_name)
            truth = _matcher(data, ground_truth_label_name, dataset_positive_outcome)

        def group_test(group):
            parts = [(_column(data, c), _matcher(data, c, s)) for c, s in _group_items(group)]
            return lambda r: all(m(r[i]) for i, m in parts)

        in_priv = group_test(dataset_privileged_group)
        in_unpriv = group_test(dataset_unprivileged_group)
        extra = [
            (name, _column(data, c), _matcher(data, c, s))
            for name, (c, s) in (sensitive_values or {}).items()
        ]

        self.rows = []
        self.rows_skipped = 0
        for r in data["rows"]:
            if any(r[i] is None for i in required):
                self.rows_skipped += 1
                continue
            row = dict(zip(header, r))
            row["__outcome"] = float(outcome(r[outcome_idx]))
            if truth is not None:
                row["__truth"] = float(truth(r[truth_idx]))
            row["__priv"] = float(in_priv(r))
            row["__unpriv"] = float(in_unpriv(r))
            for name, i, m in extra:
                row[name] = float(m(r[i]))
            self.rows.append(row)
        self.has_truth = truth is not None

    # built-in group metrics

    def _rate(self, group, truth, condition):
        hits = total = 0
        for r in self.rows:
            if r[group] != 1.0:
                continue
            if truth is not None and (r["__truth"] == 1.0) != truth:
                continue
            total += 1
            hits += r["__outcome"] == 1.0
        if total == 0:
            raise EmptyCondition("no rows satisfy the condition `%s`" % condition)
        return hits / total

    def _need_truth(self):
        if not self.has_truth:
            raise MissingLabels("no ground-truth column is bound")

    def statistical_parity_difference(self):
        pu = self._rate("__unpriv", None, "__unpriv == 1")
        pp = self._rate("__priv", None, "__priv == 1")
        return pu - pp

    def disparate_impact(self):
        pu = self._rate("__unpriv", None, "__unpriv == 1")
        pp = self._rate("__priv", None, "__priv == 1")
        if pp == 0.0:
            raise UndefinedRatio("privileged positive rate is 0")
        return pu / pp

    def _tpr(self):
        self._need_truth()
        u = self._rate("__unpriv", True, "__truth == 1 and __unpriv == 1")
        p = self._rate("__priv", True, "__truth == 1 and __priv == 1")
        return u, p

    def equal_opportunity_difference(self):
        u, p = self._tpr()
        return u - p

    def average_odds_difference(self):
        tpr_u, tpr_p = self._tpr()
        fpr_u = self._rate("__unpriv", False, "__truth == 0 and __unpriv == 1")
        fpr_p = self._rate("__priv", False, "__truth == 0 and __priv == 1")
        return 0.5 * ((fpr_u - fpr_p) + (tpr_u - tpr_p))

    # built-in individual metrics

    def _benefit_counts(self):
        self._need_truth()
        counts = [0, 0, 0]
        for r in self.rows:
            counts[1 + int(r["__outcome"] == 1.0) - int(r["__truth"] == 1.0)] += 1
        n = len(self.rows)
        if n == 0:
            raise EmptyCondition("no rows satisfy the condition `<all rows>`")
        mean = (counts[1] + 2.0 * counts[2]) / n
        if mean == 0.0:
            raise DegenerateBenefit("mean benefit is 0")
        return counts, n, mean

    def generalized_entropy_index(self, alpha=2):
        counts, n, mean = self._benefit_counts()
        acc = 0.0
        for b, c in enumerate(counts):
            if c > 0:
                acc += c * ((b / mean) ** alpha - 1.0)
        return self._finite(acc / (n * alpha * (alpha - 1.0)))

    def theil_index(self):
        counts, n, mean = self._benefit_counts()
        acc = 0.0
        for b, c in enumerate(counts):
            if b > 0 and c > 0:
                ratio = b / mean
                acc += c * ratio * math.log(ratio)
        return self._finite(acc / n)

    @staticmethod
    def _finite(v):
        if not math.isfinite(v):
            raise DegenerateBenefit("the index diverges")
        return v

    # composition primitives

    def group_size(self, predicate):
        p = _Expr(predicate)
        return sum(1 for r in self.rows if p.test(r))

    def probability(self, event, given=None):
        e = _Expr(event)
        if given is None:
            if not self.rows:
                raise EmptyCondition("no rows satisfy the condition `<all rows>`")
            return sum(1 for r in self.rows if e.test(r)) / len(self.rows)
        g = _Expr(given)
        hits = total = 0
        for r in self.rows:
            if g.test(r):
                total += 1
                if e.test(r):
                    hits += 1
        if total == 0:
            raise EmptyCondition("no rows satisfy the condition `%s`" % given)
        return hits / total

    def expected(self, body, given=None):
        b = _Expr(body)
        g = _Expr(given) if given is not None else None
        acc = 0.0
        n = 0
        for r in self.rows:
            if g is not None and not g.test(r):
                continue
            acc += b.value(r)
            n += 1
        if n == 0:
            raise EmptyCondition(
                "no rows satisfy the condition `%s`" % (given if given is not None else "<all rows>")
            )
        return acc / n

    def sum(self, over, body):
        o = _Expr(over)
        b = _Expr(body)
        acc = 0.0
        for r in self.rows:
            if o.test(r):
                acc += b.value(r)
        return acc

    @staticmethod
    def log(base, x, source="log argument"):
        if not x > 0.0:
            raise InvalidLogarithm("logarithm of non-positive value %r from `%s`" % (x, source))
        return math.log(x) / math.log(base)
