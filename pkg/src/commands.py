"""Subcommands of the command-line tool.

Every handler takes the parsed arguments and the active `Settings`, and returns the JSON payload to
print together with the exit code (0 when the queried property holds, 1 when it does not).
"""
import argparse
import logging
import pathlib
from dataclasses import dataclass

from . import causal, fixing, nested, oracle, projection, separation
from .configuration import (Limits, OracleSettings, SampleSettings, limits_from_config,
                            oracle_from_config, samples_from_config)
from .fileformats import kernel_as_dict, read_distribution, read_graph, render_graph
from .graph import InvalidArgument, names
from .kernel import apply_sequence_kernel

__version__ = '1.0.0'

log = logging.getLogger(__name__)

GRAPHS_DIR = pathlib.Path(__file__).parent / 'resources' / 'graphs'


@dataclass(frozen=True)
class Settings:
    limits: Limits
    samples: SampleSettings
    oracle: OracleSettings


def settings_from_config(cfg, args):
    return Settings(
        limits_from_config(cfg, args.max_vertices, args.max_cells),
        samples_from_config(cfg),
        oracle_from_config(cfg),
    )


def load_graph(value):
    """A graph file, or the name of one of the bundled graphs."""
    path = pathlib.Path(value)
    if not path.is_file():
        bundled = GRAPHS_DIR / f'{value}.admg'
        if not bundled.is_file():
            raise InvalidArgument(f'No graph file {value!r}.')
        path = bundled
    return read_graph(path)


def _graph(args):
    graph = load_graph(args.graph)
    if getattr(args, 'fix', None):
        graph = fixing.FixingSequence.checked(graph, args.fix).graph
    return graph


def _distribution(args, graph):
    p = read_distribution(args.distribution)
    if set(p.random) != set(graph.random) or graph.fixed:
        raise InvalidArgument(f'The distribution is over {names(p.random)}, the graph has random '
                              f'vertices {names(graph.random)} and fixed {names(graph.fixed)}.')
    return p


def _levels(values, option):
    levels = {}
    for value in values or ():
        vertex, equals, level = value.partition('=')
        if not equals or not level.isdigit():
            raise InvalidArgument(f'{option} expects vertex=level, got {value!r}.')
        levels[vertex] = int(level)
    return levels


def _cardinality(args, graph):
    cardinality = {v: 2 for v in graph.vertices}
    levels = _levels(getattr(args, 'levels', None), '--levels')
    unknown = set(levels) - set(cardinality)
    if unknown:
        raise InvalidArgument(f'--levels names unknown vertices {names(unknown)}.')
    cardinality.update(levels)
    return cardinality


def _graph_payload(graph):
    return {
        'graph': render_graph(graph),
        'random': list(graph.random),
        'fixed': list(graph.fixed),
        'directed': [list(edge) for edge in sorted(graph.directed)],
        'bidirected': [list(edge) for edge in sorted(graph.bidirected)],
    }


def run_project(args, settings):
    graph = _graph(args)
    if args.keep:
        result = projection.project(graph, args.keep)
    else:
        result = projection.latent_project(projection.ProjectionRequest.from_latent_mark(graph))
    return _graph_payload(result), 0


def run_msep(args, settings):
    graph = _graph(args)
    separated = separation.m_separated(graph, args.a, args.b, args.c or ())
    return {'separated': separated}, 0 if separated else 1


def run_fixable(args, settings):
    return {'fixable': names(fixing.fixable(_graph(args)))}, 0


def run_fix(args, settings):
    graph = load_graph(args.graph)
    sequence = fixing.FixingSequence.checked(graph, args.fix or ())
    payload = _graph_payload(sequence.graph)
    payload['witness'] = list(sequence.steps)
    if args.distribution:
        payload['kernel'] = kernel_as_dict(apply_sequence_kernel(_distribution(args, graph), sequence))
    return payload, 0


def run_reachable(args, settings):
    sets = fixing.reachable_sets(_graph(args), settings.limits)
    return {'reachable': [{'set': names(r.remaining), 'witness': list(r.witness.steps)}
                          for r in sets]}, 0


def run_intrinsic(args, settings):
    sets = fixing.intrinsic_sets(_graph(args), settings.limits)
    return {'intrinsic': [{'set': names(s.members), 'witness': list(s.witness.steps)}
                          for s in sets]}, 0


def run_constraints(args, settings):
    graph = _graph(args)
    cardinality = _cardinality(args, graph)
    if args.distribution:
        cardinality = _distribution(args, graph).cardinality
    found = nested.nested_constraints(graph, args.mode, args.order, cardinality, settings.samples,
                                      settings.limits)
    return {'mode': args.mode, 'constraints': [c.as_dict() for c in found]}, 0


def run_verify(args, settings):
    graph = _graph(args)
    p = _distribution(args, graph)
    report = nested.check_membership(graph, p, args.mode, args.order, settings.samples,
                                     settings.limits)
    return report.as_dict(), 0 if report.holds else 1


def _query(args):
    return causal.CausalQuery(frozenset(args.treatment or ()), frozenset(args.outcome))


def run_identify(args, settings):
    result = causal.identify(_graph(args), _query(args), settings.limits)
    return result.as_dict(), 0 if result.identifiable else 1


def run_evaluate(args, settings):
    graph = _graph(args)
    query = _query(args)
    result = causal.identify(graph, query, settings.limits)
    if not result.identifiable:
        return result.as_dict(), 1
    p = _distribution(args, graph)
    assignment = _levels(args.at, '--at') if args.at else None
    effect = causal.evaluate_effect(graph, p, query, assignment, result)
    payload = result.as_dict()
    payload['effect'] = kernel_as_dict(effect)
    return payload, 0


def run_oracle_dag_model(args, settings):
    graph = load_graph(args.graph)
    cardinality = _cardinality(args, graph)
    if graph.is_dag_shaped():
        p = oracle.random_dag_model(graph, cardinality, args.seed, settings.oracle, args.allow_zeros,
                                    settings.limits)
        if graph.latent:
            p = oracle.margin(p, graph.observed)
    else:
        p = oracle.canonical_margin(graph, cardinality, args.seed, settings.oracle, settings.limits)
    return kernel_as_dict(p), 0


def run_oracle_arbitrary(args, settings):
    graph = load_graph(args.graph)
    p = oracle.random_kernel(graph.random, graph.fixed, _cardinality(args, graph), args.seed,
                             settings.oracle, args.allow_zeros, settings.limits)
    return kernel_as_dict(p), 0


def run_oracle_enumerate(args, settings):
    graphs = [render_graph(g) for g in oracle.enumerate_admgs(args.vertices, settings.limits)]
    return {'count': len(graphs), 'graphs': graphs}, 0


def run_oracle_msep(args, settings):
    separated = oracle.brute_force_msep(_graph(args), args.a, args.b, args.c or (), settings.limits)
    return {'separated': separated}, 0 if separated else 1


def run_oracle_project(args, settings):
    graph = _graph(args)
    keep = args.keep or graph.observed
    return _graph_payload(oracle.brute_force_projection(graph, keep, settings.limits)), 0


def _graph_options(parser, fix=True):
    parser.add_argument('--graph', required=True, help='Graph file, or the name of a bundled graph.')
    if fix:
        parser.add_argument('--fix', nargs='+', metavar='V',
                            help='Valid fixing sequence applied to the graph first.')


def _triple_options(parser):
    parser.add_argument('-A', dest='a', nargs='+', required=True, metavar='V')
    parser.add_argument('-B', dest='b', nargs='+', required=True, metavar='V')
    parser.add_argument('-C', dest='c', nargs='*', default=[], metavar='V')


def _query_options(parser):
    parser.add_argument('--treatment', nargs='*', default=[], metavar='V')
    parser.add_argument('--outcome', nargs='+', required=True, metavar='V')


def _mode_options(parser):
    parser.add_argument('--mode', choices=nested.MODES, default='global')
    parser.add_argument('--order', nargs='+', metavar='V',
                        help='Topological order of the random vertices; defaults to the canonical one.')


def _generator_options(parser):
    _graph_options(parser, fix=False)
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--levels', nargs='+', metavar='V=K', help='Cardinalities other than 2.')
    parser.add_argument('--allow-zeros', action='store_true',
                        help='Allow zero weights in the random conditionals.')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='nestedmm',
        description='Fixing, nested Markov constraints and causal identification in ADMGs.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--config', help='Configuration file; defaults to config.ini if present.')
    parser.add_argument('--max-vertices', type=int, help='Cap on vertices of exponential enumerations.')
    parser.add_argument('--max-cells', type=int, help='Cap on the cells of a dense table.')
    parser.add_argument('--timing', action='store_true', help='Add the elapsed time to the report.')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')

    subparsers = parser.add_subparsers(dest='command', required=True)

    sub = subparsers.add_parser('project', help='Latent projection onto the kept vertices.')
    _graph_options(sub)
    sub.add_argument('--keep', nargs='+', metavar='V')
    sub.set_defaults(handler=run_project)

    sub = subparsers.add_parser('msep', help='m-separation in G^{|W}.')
    _graph_options(sub)
    _triple_options(sub)
    sub.set_defaults(handler=run_msep)

    sub = subparsers.add_parser('fixable', help='Vertices that can be fixed.')
    _graph_options(sub)
    sub.set_defaults(handler=run_fixable)

    sub = subparsers.add_parser('fix', help='Apply a fixing sequence to the graph and a distribution.')
    _graph_options(sub)
    sub.add_argument('--distribution')
    sub.set_defaults(handler=run_fix)

    sub = subparsers.add_parser('reachable', help='Reachable sets with witnesses.')
    _graph_options(sub)
    sub.set_defaults(handler=run_reachable)

    sub = subparsers.add_parser('intrinsic', help='Intrinsic sets with witnesses.')
    _graph_options(sub)
    sub.set_defaults(handler=run_intrinsic)

    sub = subparsers.add_parser('constraints', help='Nested Markov constraints of the graph.')
    _graph_options(sub)
    _mode_options(sub)
    sub.add_argument('--distribution', help='Take the cardinalities from this distribution.')
    sub.add_argument('--levels', nargs='+', metavar='V=K')
    sub.set_defaults(handler=run_constraints)

    sub = subparsers.add_parser('verify', help='Check a distribution against the nested model.')
    _graph_options(sub)
    _mode_options(sub)
    sub.add_argument('--distribution', required=True)
    sub.set_defaults(handler=run_verify)

    sub = subparsers.add_parser('identify', help='Identify p(Y | do(A)).')
    _graph_options(sub)
    _query_options(sub)
    sub.set_defaults(handler=run_identify)

    sub = subparsers.add_parser('evaluate', help='Evaluate an identified p(Y | do(A)).')
    _graph_options(sub)
    _query_options(sub)
    sub.add_argument('--distribution', required=True)
    sub.add_argument('--at', nargs='+', metavar='V=K', help='Treatment levels.')
    sub.set_defaults(handler=run_evaluate)

    sub = subparsers.add_parser('oracle', help='Reference implementations and generators.')
    oracles = sub.add_subparsers(dest='oracle', required=True)

    sub = oracles.add_parser('dag-model', help='Random member of the model of the graph.')
    _generator_options(sub)
    sub.set_defaults(handler=run_oracle_dag_model)

    sub = oracles.add_parser('arbitrary', help='Random kernel over the vertices of the graph.')
    _generator_options(sub)
    sub.set_defaults(handler=run_oracle_arbitrary)

    sub = oracles.add_parser('enumerate', help='Every labeled ADMG on n vertices.')
    sub.add_argument('--vertices', type=int, required=True)
    sub.set_defaults(handler=run_oracle_enumerate)

    sub = oracles.add_parser('msep', help='m-separation by path enumeration.')
    _graph_options(sub)
    _triple_options(sub)
    sub.set_defaults(handler=run_oracle_msep)

    sub = oracles.add_parser('project', help='Latent projection by path enumeration.')
    _graph_options(sub)
    sub.add_argument('--keep', nargs='+', metavar='V')
    sub.set_defaults(handler=run_oracle_project)

    return parser
