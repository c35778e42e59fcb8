# run.py

from snncodec import create_cli
from config import DevelopmentConfig

cli = create_cli(config_class=DevelopmentConfig)

if __name__ == '__main__':
    cli()
