__version__ = "0.1.0"

# bump when the emitted report layout changes shape, not when values change
REPORT_SCHEMA_VERSION = "1"
