"""
Entry script for the pidmatch command line.

Run ``python pidmatch_app.py --help`` for the list of commands, e.g.::

    python pidmatch_app.py tune --num 1 --den 1,2,1 --ts 2.5 --po 1 --out report.json
    python pidmatch_app.py bench table1
"""

from pidmatch.cli import main


if __name__ == '__main__':
    main()
