"""Bundled example networks.

``asia.json`` carries the classic eight-node chest-clinic structure with
project-fixture CPT values picked for strong dependencies at desk-scale
sample sizes (regenerate with ``scripts/make_asia_fixture.py``).
"""

from importlib import resources
from pathlib import Path


def asia_path() -> Path:
    """Filesystem path of the bundled Asia network file."""
    with resources.as_file(resources.files(__name__) / "asia.json") as p:
        return Path(p)
