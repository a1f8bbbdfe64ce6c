import click

from cantor_atlas.certify_engine import Certify
from cantor_atlas.guards import map_options, run_options, validated, verdict_command

claims_cmds = click.Group('claims')


@claims_cmds.command('verify-claims')
@validated
@run_options
@verdict_command('verify-claims')
def verify_claims(run):
    """Brute-force the normality and conjugacy facts over the 128-element group"""
    return Certify.claim1(run)


@claims_cmds.command('t-cantor')
@validated
@map_options
@run_options
@verdict_command('t-cantor')
def t_cantor(spec, run):
    """Decide injectivity of the coding map from the reduced recursion"""
    return Certify.t_cantor_test(spec.build(), run)
