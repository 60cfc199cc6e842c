"""Graph and distribution files, and the JSON rendering of reports."""
import itertools
import json
import logging
import re
from fractions import Fraction

import numpy as np

from .graph import InvalidArgument, MixedGraph
from .kernel import Kernel

log = logging.getLogger(__name__)

_HEADERS = ('random', 'fixed', 'latent')
_EDGE = re.compile(r'^(\S+)\s+(->|<->)\s+(\S+)$')
_RATIONAL = re.compile(r'^\d+(/\d+)?$')


class ParseError(InvalidArgument):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        if line is None:
            super().__init__(message)
        else:
            super().__init__(f'{line}:{column}: {message}')


def _strip_comment(line):
    index = line.find('#')
    return line if index < 0 else line[:index]


def parse_graph(text):
    """Reads a graph document: `random:`/`fixed:`/`latent:` declarations and `a -> b`, `a <-> b` edges."""
    declared = {header: None for header in _HEADERS}
    directed, bidirected = [], []
    where = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        content = line.strip()
        if not content:
            continue
        column = len(line) - len(line.lstrip()) + 1

        header, colon, rest = content.partition(':')
        if colon and header.strip() in _HEADERS:
            header = header.strip()
            if declared[header] is not None:
                raise ParseError(f'"{header}:" declared twice.', number, column)
            declared[header] = rest.split()
            start = line.index(":") + 1
            for vertex in declared[header]:
                where.setdefault(vertex, (number, start + line[start:].find(vertex) + 1))
            continue

        match = _EDGE.match(content)
        if not match:
            raise ParseError(f'Expected a declaration or an edge, got {content!r}.', number, column)
        tail, arrow, head = match.groups()
        for vertex, offset in ((tail, match.start(1)), (head, match.start(3))):
            known = (declared['random'] or []) + (declared['fixed'] or [])
            if vertex not in known:
                raise ParseError(f'Unknown vertex {vertex!r}.', number, column + offset)
        if arrow == '->':
            if head in (declared['fixed'] or []):
                raise ParseError(f'Directed edge {tail} -> {head} points into fixed vertex {head}.',
                                 number, column + match.start(3))
            directed.append((tail, head))
        else:
            if tail in (declared['fixed'] or []) or head in (declared['fixed'] or []):
                raise ParseError(f'Bidirected edge {tail} <-> {head} touches a fixed vertex.',
                                 number, column)
            bidirected.append((tail, head))

    if not declared['random'] and not declared['fixed']:
        raise ParseError('No vertices declared.', 1, 1)
    latent = declared['latent'] or []
    for vertex in latent:
        if vertex not in (declared['random'] or []):
            raise ParseError(f'Latent vertex {vertex!r} is not a declared random vertex.', *where[vertex])
    return MixedGraph(declared['random'] or [], declared['fixed'] or [], directed, bidirected, latent)


def render_graph(graph):
    lines = [f'random: {" ".join(graph.random)}'.rstrip()]
    if graph.fixed:
        lines.append(f'fixed: {" ".join(graph.fixed)}')
    if graph.latent:
        lines.append(f'latent: {" ".join(v for v in graph.random if v in graph.latent)}')
    lines += [f'{tail} -> {head}' for tail, head in sorted(graph.directed)]
    lines += [f'{a} <-> {b}' for a, b in sorted(graph.bidirected)]
    return '\n'.join(lines) + '\n'


def read_graph(path):
    log.debug(f'Reading graph from {path}...')
    with open(path, 'r', encoding='utf-8') as f:
        return parse_graph(f.read())


def fraction_text(value):
    value = Fraction(value)
    return f'{value.numerator}/{value.denominator}'


def parse_fraction(text):
    if not isinstance(text, str) or not _RATIONAL.match(text):
        raise ParseError(f'Expected a non-negative rational "num/den", got {text!r}.')
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ParseError(f'Zero denominator in {text!r}.') from None


def parse_distribution(text):
    """A joint distribution from its JSON document; omitted cells are zero and the total must be 1."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    if not isinstance(document, dict) or 'cardinality' not in document or 'entries' not in document:
        raise ParseError('Expected an object with "cardinality" and "entries".', 1, 1)

    cardinality = document['cardinality']
    if not isinstance(cardinality, dict) or not cardinality:
        raise ParseError('"cardinality" must be a non-empty object.')
    for vertex, levels in cardinality.items():
        if not isinstance(levels, int) or isinstance(levels, bool) or levels < 2:
            raise ParseError(f'Cardinality of {vertex!r} must be an integer of at least 2.')
    variables = tuple(cardinality)
    shape = tuple(cardinality[v] for v in variables)

    table = np.full(shape, Fraction(0), dtype=object)
    seen = set()
    for position, entry in enumerate(document['entries']):
        if not isinstance(entry, dict) or set(entry) != {'assignment', 'p'}:
            raise ParseError(f'Entry {position} must have exactly "assignment" and "p".')
        assignment = entry['assignment']
        if not isinstance(assignment, dict) or set(assignment) != set(variables):
            raise ParseError(f'Entry {position} must assign every variable exactly once.')
        index = tuple(assignment[v] for v in variables)
        for vertex, level in zip(variables, index):
            if not isinstance(level, int) or isinstance(level, bool) or not 0 <= level < cardinality[vertex]:
                raise ParseError(f'Entry {position}: level {level!r} out of range for {vertex}.')
        if index in seen:
            raise ParseError(f'Entry {position} repeats the assignment {assignment}.')
        seen.add(index)
        table[index] = parse_fraction(entry['p'])

    total = sum(table.flat, Fraction(0))
    if total != 1:
        raise ParseError(f'Probabilities sum to {fraction_text(total)}, not 1.')
    return Kernel(variables, (), cardinality, table)


def read_distribution(path):
    log.debug(f'Reading distribution from {path}...')
    with open(path, 'r', encoding='utf-8') as f:
        return parse_distribution(f.read())


def kernel_entries(q):
    entries = []
    for index in itertools.product(*(range(q.cardinality[v]) for v in q.variables)):
        assignment = dict(zip(q.variables, index))
        defined = q.defined is None or bool(q.defined[index])
        entries.append({
            'assignment': assignment,
            'p': fraction_text(q.table[index]) if defined else None,
        })
    return entries


def render_distribution(p):
    if p.fixed:
        raise InvalidArgument('Only joint distributions can be written as distribution files.')
    document = {
        'cardinality': {v: p.cardinality[v] for v in p.random},
        'entries': kernel_entries(p),
    }
    return json.dumps(document, indent=2, ensure_ascii=False) + '\n'


def kernel_as_dict(q):
    return {
        'random': list(q.random),
        'fixed': list(q.fixed),
        'cardinality': {v: q.cardinality[v] for v in q.variables},
        'entries': kernel_entries(q),
    }


def render_report(payload):
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + '\n'
