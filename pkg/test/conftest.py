import os, sys

# The test modules import helpers from test/utils.py as a top-level
# ``utils`` module (run_all_unittests.py uses test/ as the top-level dir).
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
