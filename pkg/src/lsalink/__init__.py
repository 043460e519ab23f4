"""Link-level simulator comparing OFDM and single-carrier uplinks with large receive arrays."""

__version__ = "0.1.0"
