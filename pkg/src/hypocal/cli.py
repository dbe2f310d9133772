"""Console entry point: ``hypocal simulate|calibrate|ensemble|validate|synthesize``."""
import os
import sys

MODES = ('simulate', 'calibrate', 'ensemble', 'validate', 'synthesize')

USAGE = (
    "usage: hypocal {simulate,calibrate,ensemble,validate,synthesize} "
    "[--config FILE] [--seed N] [--trials N] [--threads N] [--out DIR]\n"
)


def run_cli(argv: list[str]) -> int:
    """Run one hypocal verb and return its exit code.

    Only the hypocal verbs are exposed; Django's own management commands are not.
    """
    if argv and argv[0] in ('-h', '--help', 'help'):
        sys.stdout.write(USAGE)
        return 0
    if not argv or argv[0] not in MODES:
        sys.stderr.write(USAGE)
        sys.stderr.write(f"error=UsageError unknown mode {argv[0] if argv else ''!r}\n")
        return 2

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "hypocal runs on Django, which could not be imported. "
            "Install hypocal with its dependencies (pip install hypocal)."
        ) from exc

    try:
        execute_from_command_line(['hypocal', *argv])
    except SystemExit as exit_:
        code = exit_.code
        return code if isinstance(code, int) else (0 if code is None else 1)
    return 0


def main() -> int:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == '__main__':
    main()
