# -*- coding: utf-8 -*-
"""
modules 包初始化：有向网络隐私发布与 p0 模型估计的各功能模块。
"""
