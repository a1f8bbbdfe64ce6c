"""Decorators shared by every command: map and run options, and the exit-code contract.

Exit 0 means a verdict was reached (whatever it says), exit 2 means a budget ran out
before a verdict, exit 1 covers usage, validation and numeric errors.
"""
import logging
from functools import wraps
from pathlib import Path

import click
from pydantic import ValidationError

from cantor_atlas.config import Config, RunConfig
from cantor_atlas.errors import BudgetExhausted, CantorAtlasError
from cantor_atlas.models import Verdict
from cantor_atlas.services.preset_service import PRESET_NAMES, MapSpec
from cantor_atlas.services.report_service import ReportService

logger = logging.getLogger(__name__)

EXIT_VERDICT = 0
EXIT_ERROR = 1
EXIT_UNDECIDED = 2


def _split_list(value):
    if value is None:
        return None
    return [item for item in value.split(',') if item.strip()]


def _parse_tolerances(items):
    out = {}
    for item in items or ():
        name, sep, value = item.partition('=')
        if not sep:
            raise click.BadParameter(f"expected name=value, got '{item}'", param_hint='--tol')
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise click.BadParameter(f"'{value}' is not a number", param_hint='--tol')
    return out


def output_path(run: RunConfig, default_name: str) -> Path:
    if run.output:
        return Path(run.output)
    return Path(Config.OUTPUT_DIR) / default_name


def map_options(f):
    """Add --preset/--a/--c/--num/--den and pass the validated MapSpec as `spec`"""
    @click.option('--preset', type=click.Choice(PRESET_NAMES), default=None,
                  help='Named map family')
    @click.option('--a', 'a', default=None, help='Quartic parameter, e.g. 0+1.665i')
    @click.option('--c', 'c', default=None, help='Quadratic parameter, e.g. 4')
    @click.option('--num', default=None, help='Numerator coefficients, ascending, comma separated')
    @click.option('--den', default=None, help='Denominator coefficients, ascending, comma separated')
    @wraps(f)
    def decorated(*args, preset=None, a=None, c=None, num=None, den=None, **kwargs):
        spec = MapSpec(preset=preset, a=a, c=c, num=_split_list(num), den=_split_list(den))
        return f(*args, spec=spec, **kwargs)
    return decorated


def run_options(f):
    """Add --output/--seed/--threads/--tol and pass the validated RunConfig as `run`"""
    @click.option('--output', '-o', default=None, help='Report path')
    @click.option('--seed', type=int, default=None, help='Seed for quasi-random sampling')
    @click.option('--threads', type=int, default=None, help='Worker cap')
    @click.option('--tol', 'tol', multiple=True, help='Tolerance override name=value (repeatable)')
    @wraps(f)
    def decorated(*args, output=None, seed=None, threads=None, tol=(), **kwargs):
        fields = {'output': output, 'tolerances': _parse_tolerances(tol)}
        if seed is not None:
            fields['seed'] = seed
        if threads is not None:
            fields['threads'] = threads
        run = RunConfig(**fields)
        return f(*args, run=run, **kwargs)
    return decorated


def _dump_failure(path: Path, command: str, error: Exception, verdict: str):
    document = {
        'kind': command,
        'verdict': verdict,
        'error': {'type': type(error).__name__, 'message': str(error)},
        'evidence': getattr(error, 'evidence', None) or {},
    }
    try:
        ReportService.emit_report(document, path)
    except Exception as e:
        logger.error("Failed to write evidence dump: %s", str(e))


def verdict_command(default_name):
    """Run the command inside its RunConfig, write its report and exit by the contract.

    The wrapped function receives `run` and returns a certificate (or any object
    with `to_dict`); its `verdict` is echoed on stdout.
    """
    def decorator(f):
        @wraps(f)
        def decorated(*args, **kwargs):
            ctx = click.get_current_context()
            command = ctx.info_name or default_name
            run = kwargs.get('run') or RunConfig()
            path = output_path(run, f"{default_name}.json")
            try:
                with run.applied():
                    result = f(*args, **kwargs)
            except BudgetExhausted as e:
                logger.warning("%s undecided: %s", command, str(e))
                _dump_failure(path, command, e, Verdict.UNDECIDED.value)
                click.echo(f"{command}: undecided ({str(e)})", err=True)
                ctx.exit(EXIT_UNDECIDED)
            except CantorAtlasError as e:
                logger.error("%s failed: %s", command, str(e))
                if e.evidence:
                    _dump_failure(path, command, e, 'error')
                click.echo(f"{command}: {type(e).__name__}: {str(e)}", err=True)
                ctx.exit(EXIT_ERROR)
            except (ValidationError, ValueError) as e:
                logger.error("%s rejected its input: %s", command, str(e))
                click.echo(f"{command}: invalid input: {str(e)}", err=True)
                ctx.exit(EXIT_ERROR)

            ReportService.emit_report(result, path)
            verdict = getattr(result, 'verdict', None)
            if verdict is None and isinstance(result, dict):
                verdict = result.get('verdict')
            click.echo(f"{command}: {verdict} -> {path}")
            ctx.exit(EXIT_VERDICT)
        return decorated
    return decorator


def validated(f):
    """Turn pydantic validation failures raised while building options into exit 1"""
    @wraps(f)
    def decorated(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ValidationError as e:
            click.echo(f"invalid input: {str(e)}", err=True)
            click.get_current_context().exit(EXIT_ERROR)
    return decorated


def output_option(f):
    """Only --output; the rest of the run comes from elsewhere (a stored certificate)"""
    @click.option('--output', '-o', default=None, help='Report path')
    @wraps(f)
    def decorated(*args, output=None, **kwargs):
        return f(*args, run=RunConfig(output=output), **kwargs)
    return decorated
