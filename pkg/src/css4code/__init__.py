"""css4code: style sheets for code.

Selectors pattern-match AST values to style their textual display; a
compact nested-text layout algorithm emits HTML with SVG s-block borders.
"""

__version__ = "0.1.0"
