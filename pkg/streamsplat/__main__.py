import sys

from streamsplat import ProductionServiceRegistry, main


def run() -> None:
    sys.exit(main(sys.argv, ProductionServiceRegistry()))


if __name__ == "__main__":
    run()
