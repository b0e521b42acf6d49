"""Pacchetto src per DYADICBENCH: verifica numerica del teorema a due pesi per operatori diadici positivi."""

__version__ = "0.1.0"
