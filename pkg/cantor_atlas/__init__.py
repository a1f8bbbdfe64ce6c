import logging
import sys

import click

from cantor_atlas.config import Config
from cantor_atlas.guards import EXIT_ERROR

__version__ = '1.0.0'


class AtlasGroup(click.Group):
    """Click group whose usage errors exit 1; exit 2 is kept for undecided runs"""

    def main(self, *args, standalone_mode=True, **kwargs):
        try:
            code = super().main(*args, standalone_mode=False, **kwargs)
        except click.ClickException as e:
            e.show()
            code = EXIT_ERROR
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = EXIT_ERROR
        if not isinstance(code, int):
            code = 0
        if standalone_mode:
            sys.exit(code)
        return code


def configure_logging(level):
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )


def create_app(config_class=Config):
    configure_logging(config_class.LOG_LEVEL)

    @click.group(cls=AtlasGroup)
    @click.version_option(__version__, prog_name='cantor-atlas')
    @click.option('--log-level', default=None, help='Override CANTOR_ATLAS_LOG_LEVEL')
    def cli(log_level=None):
        """Cantor classification of hyperbolic rational maps"""
        if log_level:
            logging.getLogger().setLevel(log_level.upper())

    # Register command groups
    from cantor_atlas.commands.analysis_commands import analysis_cmds
    from cantor_atlas.commands.recursion_commands import recursion_cmds
    from cantor_atlas.commands.claims_commands import claims_cmds
    from cantor_atlas.commands.certify_commands import certify_cmds

    for group in (analysis_cmds, recursion_cmds, claims_cmds, certify_cmds):
        for name, command in group.commands.items():
            cli.add_command(command, name)

    return cli
