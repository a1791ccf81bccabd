#!/usr/bin/env python3
# robustlr documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import re
import sys

sys.path.insert(0, os.path.abspath('..'))


def get_version_number():
    """Read the version from pyproject.toml, wherever Sphinx runs from."""
    here = os.path.realpath(os.path.curdir)
    if here.endswith('docs/source'):
        path = '../../pyproject.toml'
    elif here.endswith('docs'):
        path = '../pyproject.toml'
    else:
        path = 'pyproject.toml'
    with open(path, encoding='utf-8') as stream:
        match = re.search(r'^\s*version\s*=\s*"([^"]+)"', stream.read(), re.M)
    assert match, 'Could not find the version number in pyproject.toml.'
    return match.group(1)


# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx_autodoc_typehints',
]
templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'robustlr'
copyright = '2022 by Nando Florestan'
author = 'Nando Florestan'

current = get_version_number()
version = '.'.join(current.split('.')[:2])  # The short X.Y version
release = current  # The full version, including alpha/beta/rc tags

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'
autodoc_member_order = 'bysource'

# -- Options for HTML output ----------------------------------------------

html_theme = 'pyramid'
html_static_path = ['_static']
htmlhelp_basename = 'robustlrdoc'

# -- Options for other output ---------------------------------------------

latex_documents = [
    (master_doc, 'robustlr.tex', 'robustlr Documentation', author, 'manual'),
]
man_pages = [
    (master_doc, 'robustlr', 'robustlr Documentation', [author], 1),
]
texinfo_documents = [
    (master_doc, 'robustlr', 'robustlr Documentation', author, 'robustlr',
     'Minimax robust likelihood ratio tests.', 'Miscellaneous'),
]
