"""Speech augmentation and ASR evaluation toolkit."""

__author__ = """prosokit developers"""
__email__ = ""
__version__ = "0.1.0"
