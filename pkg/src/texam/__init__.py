"""texam: computer-based testing with text-native math rendering.

Exam questions carry a TeX-flavoured markup subset (inline/display math,
verbatim code, tabular tables) that is compiled server-side to HTML with
MathML Core, so content is stored and delivered as structured text rather
than rasterized images.
"""

__version__ = "0.1.0"
