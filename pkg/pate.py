#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import sys

from experiment import cli

if __name__ == '__main__':
    sys.exit(cli())
