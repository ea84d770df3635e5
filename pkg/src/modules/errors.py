"""
❗ 异常定义模块
领域错误、解析错误与数值失败
"""

from typing import Any, Optional


class P0DPError(Exception):
    """本工具所有异常的基类"""


class DomainError(P0DPError, ValueError):
    """输入不满足操作的前置条件"""


class EdgeListParseError(DomainError):
    """边列表格式错误，携带出错行号"""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"第 {line_number} 行: {message}")
        self.line_number = line_number


class StructureError(DomainError):
    """矩阵不满足 L_n(m, M) 类的结构要求"""


class DatasetMissingError(P0DPError, FileNotFoundError):
    """数据集文件不存在，附带下载提示"""

    def __init__(self, path: Any, hint: str):
        super().__init__(f"数据集不存在: {path}。{hint}")
        self.path = path
        self.hint = hint


class NumericalFailure(P0DPError):
    """估计方程无解或求解失败"""

    def __init__(self, message: str, fit_result: Optional[Any] = None):
        super().__init__(message)
        self.fit_result = fit_result
