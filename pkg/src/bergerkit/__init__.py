"""bergerkit: exact holonomy-algebra classification checks and Einstein metric verification."""

__version__ = "0.1.0"
