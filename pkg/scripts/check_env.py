# -*- coding: utf-8 -*-
"""
环境预检脚本 check_env.py

用途:
- 运行实验前检查 Python 版本、数值计算依赖、并行核数、配置文件与数据集是否就绪。
- 打印人类可读结果，并把 JSON 报告写到日志目录。

执行方式:
- 命令行运行: `python scripts/check_env.py`
- 可选参数: `--skip-dataset` 不把 UC Irvine 数据集缺失视为失败
"""

import argparse
import importlib
import json
import platform
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / 'src'))

REQUIRED_PACKAGES = (
    ('numpy', 'numpy'),
    ('scipy', 'scipy'),
    ('pandas', 'pandas'),
    ('dataclasses-json', 'dataclasses_json'),
    ('colorlog', 'colorlog'),
    ('psutil', 'psutil'),
    ('requests', 'requests'),
)
OPTIONAL_PACKAGES = (('pytest', 'pytest'), ('networkx', 'networkx'))


def check_python_version(required_version: Tuple[int, int] = (3, 10)) -> Dict[str, Any]:
    """检查 Python 版本是否不低于要求。

    参数:
    - required_version: 最低主次版本，例如 (3, 10)。

    返回值:
    - 字典对象，包含: ok(bool), current(str), required(str)
    """
    current = sys.version_info
    return {
        "ok": (current.major, current.minor) >= required_version,
        "current": f"{current.major}.{current.minor}.{current.micro}",
        "required": f">={required_version[0]}.{required_version[1]}"
    }


def check_package(pkg_name: str, import_name: Optional[str] = None) -> Dict[str, Any]:
    """检测第三方包是否可导入并读取版本号。

    参数:
    - pkg_name: 包名(用于展示)。
    - import_name: 实际导入名，默认与包名一致。

    返回值:
    - 字典对象，包含: installed(bool), version(str或None), error(str或None)
    """
    try:
        module = importlib.import_module(import_name or pkg_name)
        return {"installed": True, "version": getattr(module, "__version__", None), "error": None}
    except ImportError as e:
        return {"installed": False, "version": None, "error": str(e)}


def check_project() -> Dict[str, Any]:
    """检查配置文件加载、并行进程数与数据文件。

    返回值:
    - 字典对象，包含 config_ok、workers、fixture_exists、dataset_exists 等字段；
      模块导入失败时 config_ok 为 False 并附带 error。
    """
    try:
        from modules.config import get_config
    except ImportError as e:
        return {"config_ok": False, "error": str(e)}

    config = get_config()
    dataset = config.resolve_path('experiments.dataset_path', 'data/uci/CollegeMsg.txt')
    fixture = config.resolve_path('experiments.fixture_path', 'data/fixtures/uci_fixture_n50.edges')
    return {
        "config_ok": True,
        "config_file": str(config.config_file),
        "workers": config.get_worker_count(),
        "fixture_path": str(fixture),
        "fixture_exists": fixture.exists(),
        "dataset_path": str(dataset),
        "dataset_exists": dataset.exists(),
        "error": None,
    }


def gather_env_info() -> Dict[str, Any]:
    """汇总全部检查项。"""
    return {
        "timestamp": datetime.now().isoformat(),
        "system": {
            "platform": platform.platform(),
            "python": platform.python_version(),
            "machine": platform.machine(),
        },
        "checks": {
            "python_version": check_python_version(),
            "packages": {name: check_package(name, module) for name, module in REQUIRED_PACKAGES},
            "optional": {name: check_package(name, module) for name, module in OPTIONAL_PACKAGES},
            "project": check_project(),
        },
    }


def print_human_readable(report: Dict[str, Any]) -> None:
    """以人类可读形式打印检测结果概要。"""
    def ok_str(x: bool) -> str:
        return "✅ 通过" if x else "❌ 未通过"

    checks = report["checks"]
    print("== 环境预检结果 ==")
    print(f"时间: {report['timestamp']}")
    print(f"平台: {report['system']['platform']}")
    py = checks["python_version"]
    print(f"Python版本检查: {ok_str(py['ok'])} (当前 {py['current']}, 要求 {py['required']})")
    print("")
    for group in ("packages", "optional"):
        for name, info in checks[group].items():
            status = f"已安装 {info['version'] or ''}".strip() if info["installed"] else "未安装"
            print(f"{name}: {status}{' (可选)' if group == 'optional' else ''}")
    print("")
    project = checks["project"]
    if not project["config_ok"]:
        print(f"配置加载: ❌ {project['error']}")
        return
    print(f"配置文件: {project['config_file']}")
    print(f"并行进程数: {project['workers']}")
    print(f"测试子图: {'存在' if project['fixture_exists'] else '缺失'} ({project['fixture_path']})")
    print(f"UC Irvine 数据集: {'存在' if project['dataset_exists'] else '缺失'} ({project['dataset_path']})")


def main():
    """命令行入口: 执行检测、打印并保存报告，以退出码表示结果(0 通过，2 有关键项未通过)。"""
    parser = argparse.ArgumentParser(description="环境预检脚本: 检查依赖、配置与数据集")
    parser.add_argument("--skip-dataset", action="store_true", help="数据集缺失不算失败")
    args = parser.parse_args()

    report = gather_env_info()
    print_human_readable(report)

    logs_dir = ROOT / "logs"
    try:
        logs_dir.mkdir(parents=True, exist_ok=True)
        out_path = logs_dir / f"env_check_{datetime.now().strftime('%Y%m%d_%H%M%S')}.json"
        with open(out_path, "w", encoding="utf-8") as f:
            json.dump(report, f, ensure_ascii=False, indent=2)
        print(f"\nJSON报告已保存: {out_path}")
    except OSError as e:
        print(f"\nJSON报告保存失败: {e}")

    checks = report["checks"]
    project = checks["project"]
    critical_ok = (
        checks["python_version"]["ok"] and
        all(info["installed"] for info in checks["packages"].values()) and
        project["config_ok"] and project["fixture_exists"] and
        (args.skip_dataset or project["dataset_exists"])
    )
    sys.exit(0 if critical_ok else 2)


if __name__ == "__main__":
    main()
