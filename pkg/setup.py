import re
from pathlib import Path
from setuptools import setup, find_packages

VERSION_FILE = Path('src/version.py')
version = re.search(r"""__version__ *= *['"]([^'"]+)['"]""", VERSION_FILE.read_text())[1]

# src, src.mesh, ... are installed as plinv, plinv.mesh, ...
packages = [re.sub(r'^src', 'plinv', name) for name in find_packages(include=['src', 'src.*'])]

# Read requirements directly so install_requires does not depend on a build plugin.
requirements = [
    line.strip() for line in Path('requirements.txt').read_text().splitlines()
    if line.strip() and not line.strip().startswith('#')
]
dev_requirements = [
    line.strip() for line in Path('requirements-dev.txt').read_text().splitlines()
    if line.strip() and not line.strip().startswith('#')
]

setup(
    version=version,
    install_requires=requirements,
    extras_require={'dev': dev_requirements},
    packages=packages,
    package_dir={'plinv': 'src'},
)
