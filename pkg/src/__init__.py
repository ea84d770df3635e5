# -*- coding: utf-8 -*-
"""
src 包初始化：程序入口 main.py 与 modules 包所在目录。
"""
