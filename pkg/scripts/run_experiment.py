"""Run one experiment command (test, calibrate, power, sweep, lb_*, ...) from a hydra config."""

import sys

import hydra
from omegaconf import DictConfig

from convex_truncation.errors import (
    ConfigParse,
    RejectionExhausted,
    RootNotBracketed,
    SpecParse,
)
from convex_truncation.testers.constants import DEFAULT_CONSTANTS
from convex_truncation.utils import pretty_print_cfg, pretty_print_str
from convex_truncation.utils.io import dump_json, write_text
from convex_truncation.utils.scripts import emit_report, error_context, run


@hydra.main(config_path="configs", config_name="config_default")
def run_experiment(cfg: DictConfig):
    """Main experiment function, accessed from command line."""

    if cfg.print_defaults:
        write_text(dump_json(DEFAULT_CONSTANTS.to_dict()))
        return

    # progress only goes to stdout when the payload does not
    verbose = cfg.out is not None
    if verbose:
        print("Our Hydra config file:")
        pretty_print_cfg(cfg)

    try:
        report = run(cfg)
    except (ConfigParse, SpecParse, RejectionExhausted, RootNotBracketed, IOError) as e:
        sys.stderr.write("error (%s): %s\n" % (error_context(cfg), e))
        sys.exit(1)

    emit_report(report, cfg)
    if verbose:
        pretty_print_str(
            "%s finished in %.2f s (seed=%i); report written to %s"
            % (report.command, report.wall_time, report.seed, cfg.out)
        )


if __name__ == "__main__":
    run_experiment()
