#!/usr/bin/env python3
#
# epigame documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys

# If extensions (or modules to document with autodoc) are in another directory,
# add these directories to sys.path here.
sys.path.append(os.path.abspath('..'))

import epigame  # noqa: E402

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.viewcode',
    'sphinx.ext.mathjax',
    'sphinx.ext.intersphinx',
    'numpydoc',
    'myst_parser',
]

numpydoc_show_class_members = False
numpydoc_class_members_toctree = False

autodoc_member_order = "bysource"
autodoc_typehints = "none"

source_suffix = {
    '.rst': 'restructuredtext',
    '.md': 'markdown',
}

main_doc = 'index'

project = 'epigame'
author = 'The epigame developers'
copyright = '2026, The epigame developers'

version = epigame.__version__
release = epigame.__version__

language = 'en'

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

pygments_style = 'sphinx'

todo_include_todos = False

myst_enable_extensions = [
    "colon_fence",
    "dollarmath",
]

# -- Options for HTML output ----------------------------------------------

html_theme = 'pydata_sphinx_theme'

htmlhelp_basename = 'epigamedoc'

# -- Options for manual page output ---------------------------------------

man_pages = [(main_doc, 'epigame', 'epigame Documentation', [author], 1)]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'scipy': ('https://docs.scipy.org/doc/scipy', None),
    'networkx': ('https://networkx.org/documentation/stable', None),
}
