"""
⚙️ 配置管理模块
统一管理和访问求解器、隐私机制、去噪与实验流程的配置
"""

import json
import os
import logging
from typing import Dict, Any
from pathlib import Path

logger = logging.getLogger(__name__)

# 项目根目录（src/modules/config.py 向上两级）
PROJECT_ROOT = Path(__file__).resolve().parents[2]

DEFAULT_CONFIG: Dict[str, Any] = {
    "app": {
        "name": "p0-privacy-toolkit",
        "version": "1.0.0",
        "description": "有向网络边隐私发布与 p0 模型参数估计工具"
    },
    "solver": {
        "tolerance": 1e-8,
        "max_iterations": 5000,
        "parameter_bound": 30.0,
        "damping": 1.0,
        "fallback_damping": 0.5,
        "oscillation_window": 20,
        "newton_threshold": 1.0
    },
    "privacy": {
        "sensitivity": 2,
        "pairwise_tolerance": 1e-12
    },
    "denoise": {
        "oracle_max_n": 4,
        "oracle_threshold": 0
    },
    "experiments": {
        "workers": 0,
        "output_dir": "output",
        "fixture_path": "data/fixtures/uci_fixture_n50.edges",
        "dataset_path": "data/uci/CollegeMsg.txt",
        "dataset_url": "https://snap.stanford.edu/data/CollegeMsg.txt.gz",
        "download_timeout": 120,
        "download_retries": 3,
        "retry_delay": 2,
        "qq_quantile_points": 99
    },
    "system": {
        "log_level": "INFO",
        "log_dir": "logs",
        "max_log_files": 10,
        "color_console": True
    }
}

REQUIRED_SECTIONS = ['app', 'solver', 'privacy', 'denoise', 'experiments', 'system']


class ConfigManager:
    """配置管理器"""

    def __init__(self, config_file: Any = None):
        if config_file is None:
            config_file = os.environ.get('P0DP_CONFIG', PROJECT_ROOT / "config" / "settings.json")
        self.config_file = Path(config_file)
        self.config_data: Dict[str, Any] = {}
        self._load_config()
        logger.debug("🔧 配置管理器初始化完成")

    def _load_config(self) -> None:
        """加载配置文件"""
        try:
            if not self.config_file.exists():
                logger.warning(f"配置文件不存在: {self.config_file}")
                self._create_default_config()
                return

            with open(self.config_file, 'r', encoding='utf-8') as f:
                self.config_data = json.load(f)

            logger.debug(f"配置文件加载成功: {self.config_file}")
            self._validate_config()

        except json.JSONDecodeError as e:
            # 格式损坏时只在内存中使用默认值，不覆盖用户文件
            logger.error(f"配置文件格式错误: {e}，使用内置默认配置")
            self.config_data = json.loads(json.dumps(DEFAULT_CONFIG))
        except OSError as e:
            logger.error(f"配置文件加载失败: {e}，使用内置默认配置")
            self.config_data = json.loads(json.dumps(DEFAULT_CONFIG))

    def _create_default_config(self) -> None:
        """创建默认配置"""
        self.config_data = json.loads(json.dumps(DEFAULT_CONFIG))
        if self.save_config():
            logger.info("默认配置文件已创建")

    def _validate_config(self) -> None:
        """验证配置文件，缺失的段用默认值补齐"""
        for section in REQUIRED_SECTIONS:
            if section not in self.config_data:
                logger.warning(f"配置缺少必要部分: {section}")
                self.config_data[section] = dict(DEFAULT_CONFIG[section])

    def get(self, key: str, default: Any = None) -> Any:
        """
        获取配置值，支持嵌套键访问

        Args:
            key: 配置键，支持点分隔的嵌套键，如 'solver.tolerance'
            default: 默认值

        Returns:
            配置值
        """
        try:
            value = self.config_data
            for k in key.split('.'):
                value = value[k]
            return value
        except (KeyError, TypeError):
            logger.debug(f"配置键不存在: {key}，使用默认值: {default}")
            return default

    def set(self, key: str, value: Any) -> None:
        """
        设置配置值，支持嵌套键设置

        Args:
            key: 配置键，支持点分隔的嵌套键
            value: 配置值
        """
        keys = key.split('.')
        config = self.config_data

        for k in keys[:-1]:
            if k not in config:
                config[k] = {}
            config = config[k]

        config[keys[-1]] = value
        logger.debug(f"配置已更新: {key} = {value}")

    def get_section(self, section: str) -> Dict[str, Any]:
        """获取整个配置段"""
        return self.config_data.get(section, {})

    def save_config(self) -> bool:
        """
        保存配置到文件

        Returns:
            保存是否成功
        """
        try:
            self.config_file.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self.config_data, f, indent=2, ensure_ascii=False)
            logger.info(f"配置文件保存成功: {self.config_file}")
            return True
        except OSError as e:
            logger.error(f"配置文件保存失败: {e}")
            return False

    def get_solver_config(self) -> Dict[str, Any]:
        """获取求解器配置"""
        return self.get_section('solver')

    def get_experiments_config(self) -> Dict[str, Any]:
        """获取实验配置"""
        return self.get_section('experiments')

    def get_worker_count(self) -> int:
        """
        获取并行工作进程数

        环境变量 P0DP_WORKERS 优先；配置为 0 时按物理核数自动决定
        """
        env_value = os.environ.get('P0DP_WORKERS')
        if env_value:
            try:
                return max(1, int(env_value))
            except ValueError:
                logger.warning(f"P0DP_WORKERS 不是整数: {env_value}，忽略")

        workers = int(self.get('experiments.workers', 0) or 0)
        if workers > 0:
            return workers

        from .utils import SystemUtils
        return SystemUtils.default_worker_count()

    def resolve_path(self, key: str, default: str) -> Path:
        """把配置中的相对路径解析到项目根目录下"""
        path = Path(self.get(key, default))
        return path if path.is_absolute() else PROJECT_ROOT / path

    def create_directories(self) -> None:
        """创建必要的目录"""
        for key, default in (('system.log_dir', 'logs'), ('experiments.output_dir', 'output')):
            directory = self.resolve_path(key, default)
            directory.mkdir(parents=True, exist_ok=True)
            logger.debug(f"创建目录: {directory}")


# 全局配置实例
CONFIG = ConfigManager()


def get_config() -> ConfigManager:
    """获取全局配置实例"""
    return CONFIG
