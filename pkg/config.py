# config.py

import os

# Absolute path to the project root, so default data/output folders work from any cwd.
basedir = os.path.abspath(os.path.dirname(__file__))

class Config:
    """Base configuration class. Contains settings common to all environments."""
    # Worker cap for grid commands (ablate, encodings).
    THREADS = int(os.environ.get('SNNCODEC_THREADS') or 1)
    LOG_LEVEL = os.environ.get('SNNCODEC_LOG_LEVEL') or 'INFO'
    DATA_DIR = os.environ.get('SNNCODEC_DATA_DIR') or os.path.join(basedir, 'data')
    OUTPUT_DIR = os.environ.get('SNNCODEC_OUTPUT_DIR') or os.path.join(basedir, 'runs')
    # DEBUG lowers the default log level to DEBUG.
    DEBUG = False

class DevelopmentConfig(Config):
    """Configuration for interactive use."""
    DEBUG = True

class TestingConfig(Config):
    """Configuration for running automated tests."""
    THREADS = 1
    LOG_LEVEL = 'WARNING'
    DATA_DIR = os.path.join(basedir, 'tests', 'fixtures')
