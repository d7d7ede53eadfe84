#!/usr/bin/env python3
"""
kerrml 命令行入口
用法: python kerrml.py verify all --out output
"""

import os
import sys

# 添加项目根目录到 Python 路径
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
