import os
import sys

_HERE = os.path.dirname(__file__)
sys.path.insert(0, _HERE)                                    # oracles.py
sys.path.insert(0, os.path.join(os.path.dirname(_HERE), "src"))  # hpsim without install
