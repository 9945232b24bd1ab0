"""Attested differentially-private linear regression.

Thin Python surface over the compiled core: fixed-point arithmetic,
dataset packing, the noisy least-squares guest, receipt generation and
logarithmic verification.
"""

try:
    from ._adpr import *  # noqa: F401,F403
except ImportError:  # running against a build tree, module beside the package
    from _adpr import *  # noqa: F401,F403

__version__ = "0.1.0"
