import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional


@dataclass(frozen=True)
class Settings:
    """Run-time knobs shared by the library entry points and the CLI.

    flags given on the command line override the environment (GENGAP_CACHE_DIR, GENGAP_LOG, GENGAP_SEED),
    which overrides the defaults below.
    """

    seed: int = 0
    depth_cap: int = 8  # maximal word weight of the spinning windows used to verify certificates
    brute_force_cap: int = 3**6  # largest p^dim the exhaustive oracle will enumerate
    split_attempts: int = 64  # random endomorphisms tried before giving up on splitting a module
    candidate_budget: int = 400  # random candidate vectors tried by the greedy generator search
    rechoice_budget: int = 200  # perturbations tried when re-choosing a generating set
    swan_rounds: int = 6
    cache_dir: Optional[Path] = None
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, **overrides) -> "Settings":
        env = {}
        if os.environ.get("GENGAP_CACHE_DIR"):
            env["cache_dir"] = Path(os.environ["GENGAP_CACHE_DIR"])
        if os.environ.get("GENGAP_LOG"):
            env["log_level"] = os.environ["GENGAP_LOG"].upper()
        if os.environ.get("GENGAP_SEED"):
            env["seed"] = int(os.environ["GENGAP_SEED"])
        env.update({key: value for key, value in overrides.items() if value is not None})
        return replace(cls(), **env)


DEFAULT_SETTINGS = Settings()

# smaller searches for quick interactive runs and the test-suite
FAST_SETTINGS = Settings(depth_cap=4, candidate_budget=150, rechoice_budget=60, swan_rounds=3)
