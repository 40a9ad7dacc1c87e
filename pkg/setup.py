import os.path

from setuptools import find_packages, setup

with open(os.path.join(os.path.dirname(__file__), 'README.md')) as f:
    LONG_DESCRIPTION = f.read()
    DESCRIPTION = LONG_DESCRIPTION.splitlines()[0].lstrip('#').strip()

setup(
    name='noetherlab',
    use_scm_version=True,

    description=DESCRIPTION,
    long_description=LONG_DESCRIPTION,
    long_description_content_type='text/markdown',
    keywords=['hamiltonian', 'noether', 'symmetry', 'contact geometry', 'integrability', 'pytest'],
    license='MIT',

    zip_safe=True,
    packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    include_package_data=True,
    entry_points={
        'console_scripts': [
            'noetherlab = noetherlab.cli:main',
        ],
        'pytest11': [
            'noetherlab_plugin = noetherlab.plugin',
        ],
    },

    python_requires='>=3.8',
    setup_requires=[
        'setuptools_scm',
    ],
    install_requires=[
        'numpy',
    ],
    package_data={"noetherlab": ["py.typed"]},
)
