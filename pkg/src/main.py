import logging
import sys
import prometheus_client

import util
import commands

config = util.config

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_CONTRACT, EXIT_CONVERGENCE = 0, 1, 2, 3, 4

def main(argv=None):
    try:
        args = commands.build_parser().parse_args(argv)
    except util.ParseError as e:
        logging.error("%s", e)
        return EXIT_INPUT
    if args.config: util.load_config(args.config)
    level = args.log_level or config.get("log_level", "INFO")
    logging.basicConfig(level=level.upper(), format="%(levelname)s %(asctime)s %(message)s", datefmt="%H:%M:%S %d/%m/%Y")
    if config.get("metrics_port"): prometheus_client.start_http_server(config["metrics_port"])
    try:
        args.handler(args)
        code = EXIT_OK
    except util.ValidationError as e:
        logging.error("Invalid input in %s: %s", args.command, e)
        code = EXIT_INPUT
    except util.ContractError as e:
        logging.error("Solver contract violated in %s: %s", args.command, e)
        code = EXIT_CONTRACT
    except util.ConvergenceError as e:
        logging.error("Oracle failed in %s: %s", args.command, e)
        code = EXIT_CONVERGENCE
    except Exception:
        logging.exception("Internal error in %s", args.command)
        code = EXIT_INTERNAL
    if args.metrics_file: prometheus_client.write_to_textfile(args.metrics_file, prometheus_client.REGISTRY)
    return code

if __name__ == "__main__":
    sys.exit(main())
