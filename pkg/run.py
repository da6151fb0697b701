import asyncio
import os
import sys

from pyslocc.app import make_parser, starter

if __name__ == "__main__":
    # parse command-line argment
    args = make_parser().parse_args()

    if os.name == "nt":
        asyncio.set_event_loop_policy(asyncio.WindowsSelectorEventLoopPolicy())

    sys.exit(asyncio.run(starter(args)))
