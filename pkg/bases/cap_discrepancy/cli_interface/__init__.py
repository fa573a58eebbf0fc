from cap_discrepancy.cli_interface import core

__all__ = ["core"]
