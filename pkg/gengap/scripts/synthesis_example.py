"""Script to
1. show how to build and certify a minimal generating set from Python
2. quickly test the synthesis on a small free product
"""

import click
from gengap.config import DEFAULT_SETTINGS, FAST_SETTINGS  # noqa
from gengap.formulas import FreeProductProblem, d_induced
from gengap.synth import synthesize_generators


@click.command()
@click.option("--factors", default="C2xZ,C3xZ", help="free factors in the inline grammar")
@click.option("--module", default="relation", help="augmentation or relation")
@click.option("--settings", "settings_name", default="FAST_SETTINGS", help="preset to use, must match its variable name")
def synthesize_example(factors: str, module: str, settings_name: str) -> None:
    problem = FreeProductProblem.from_dict({"factors": factors.split(","), "module": module})
    try:
        settings = globals()[settings_name]
    except KeyError:
        raise ValueError(f"no settings preset named {settings_name}")

    formula = d_induced(problem)
    logger.info(f"{problem.describe()}: d = {formula.value}, per prime {formula.table}")
    cert = synthesize_generators(problem, settings)
    logger.info(f"{cert.size} generators, exponent {cert.exponent}, {cert.verification.status}")
    for k, generator in enumerate(cert.generators):
        logger.info(f"x_{k} = {generator.to_json()}")


if __name__ == "__main__":
    """
    example: python gengap/scripts/synthesis_example.py --factors C2,C3 --module augmentation
    """
    import loguru

    logger = loguru.logger
    synthesize_example()
