"""
🧰 工具函数模块
日志、文件、系统信息与可复现随机流等通用工具
"""

import hashlib
import json
import logging
import logging.handlers
import os
import platform
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

logger = logging.getLogger(__name__)


class FileUtils:
    """文件处理工具类"""

    @staticmethod
    def ensure_directory(directory: Union[str, Path]) -> Path:
        """确保目录存在"""
        path = Path(directory)
        path.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def write_json(path: Union[str, Path], payload: Dict[str, Any]) -> Path:
        """以 UTF-8、缩进 2 写出 JSON，键排序保证字节级一致"""
        path = Path(path)
        FileUtils.ensure_directory(path.parent)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, ensure_ascii=False, sort_keys=True)
        return path

    @staticmethod
    def sha256_file(path: Union[str, Path]) -> str:
        """计算文件的 SHA-256 摘要"""
        digest = hashlib.sha256()
        with open(path, 'rb') as f:
            for chunk in iter(lambda: f.read(1 << 20), b''):
                digest.update(chunk)
        return digest.hexdigest()


class SystemUtils:
    """系统工具类"""

    @staticmethod
    def get_system_info() -> Dict[str, Any]:
        """获取系统信息（写入运行清单）"""
        info = {
            'platform': platform.platform(),
            'system': platform.system(),
            'release': platform.release(),
            'machine': platform.machine(),
            'python_version': platform.python_version(),
        }
        info.update(SystemUtils.get_cpu_info())
        return info

    @staticmethod
    def get_cpu_info() -> Dict[str, Any]:
        """获取CPU核数信息"""
        try:
            import psutil
            return {
                'physical_cores': psutil.cpu_count(logical=False),
                'logical_cores': psutil.cpu_count(logical=True),
            }
        except ImportError:
            return {'physical_cores': None, 'logical_cores': os.cpu_count()}

    @staticmethod
    def default_worker_count() -> int:
        """按物理核数决定默认并行进程数"""
        cpu = SystemUtils.get_cpu_info()
        cores = cpu.get('physical_cores') or cpu.get('logical_cores') or 1
        return max(1, int(cores))

    @staticmethod
    def get_library_versions() -> Dict[str, str]:
        """获取数值计算依赖的版本号"""
        import pandas
        import scipy

        return {
            'numpy': np.__version__,
            'scipy': scipy.__version__,
            'pandas': pandas.__version__,
        }


class RandomUtils:
    """可复现随机流工具类

    每个重复实验的随机流由 (base_seed, 键...) 唯一确定，与并行进程数无关。
    """

    @staticmethod
    def derive_seed(base_seed: int, *keys: Any) -> np.random.SeedSequence:
        """
        由基础种子与任意键派生独立的 SeedSequence

        Args:
            base_seed: 基础种子
            *keys: 重复编号、机制标签等（字符串或整数）

        Returns:
            SeedSequence
        """
        material = json.dumps([str(k) for k in keys]).encode('utf-8')
        digest = hashlib.sha256(material).digest()
        spawn_key = tuple(int.from_bytes(digest[i:i + 4], 'little') for i in range(0, 16, 4))
        return np.random.SeedSequence(entropy=int(base_seed), spawn_key=spawn_key)

    @staticmethod
    def rng(base_seed: int, *keys: Any) -> np.random.Generator:
        """返回 (base_seed, keys) 对应的 PCG64 生成器"""
        return np.random.Generator(np.random.PCG64(RandomUtils.derive_seed(base_seed, *keys)))

    @staticmethod
    def as_generator(seed_or_rng: Union[None, int, np.random.Generator]) -> np.random.Generator:
        """把 None / 整数种子 / Generator 统一成 Generator"""
        if isinstance(seed_or_rng, np.random.Generator):
            return seed_or_rng
        return np.random.default_rng(seed_or_rng)


class LogUtils:
    """日志工具类"""

    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

    @staticmethod
    def setup_logging(
        log_level: str = "INFO",
        log_dir: Union[str, Path] = "logs",
        max_files: int = 10,
        color: bool = True
    ) -> None:
        """设置日志系统：彩色控制台 + 轮转文件"""
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)

        file_formatter = logging.Formatter(LogUtils.LOG_FORMAT, datefmt=LogUtils.DATE_FORMAT)
        console_formatter = file_formatter
        if color:
            try:
                import colorlog
                console_formatter = colorlog.ColoredFormatter(
                    '%(log_color)s' + LogUtils.LOG_FORMAT,
                    datefmt=LogUtils.DATE_FORMAT,
                    log_colors={
                        'DEBUG': 'cyan',
                        'INFO': 'green',
                        'WARNING': 'yellow',
                        'ERROR': 'red',
                        'CRITICAL': 'bold_red',
                    }
                )
            except ImportError:
                logger.debug("colorlog 未安装，使用普通控制台格式")

        root_logger = logging.getLogger()
        root_logger.setLevel(getattr(logging, str(log_level).upper(), logging.INFO))
        root_logger.handlers.clear()

        # 日志走标准错误，标准输出留给 CLI 的数据流
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(console_formatter)
        root_logger.addHandler(console_handler)

        file_handler = logging.handlers.RotatingFileHandler(
            LogUtils.get_log_file(log_path),
            maxBytes=10 * 1024 * 1024,
            backupCount=max_files,
            encoding='utf-8'
        )
        file_handler.setFormatter(file_formatter)
        root_logger.addHandler(file_handler)

        logger.debug("日志系统初始化完成")

    @staticmethod
    def get_log_file(log_dir: Union[str, Path] = "logs") -> Path:
        """获取日志文件路径"""
        return Path(log_dir) / "runtime.log"

    @staticmethod
    def clear_old_logs(log_dir: Union[str, Path] = "logs", days: int = 7) -> int:
        """清理旧日志文件，返回删除的文件数"""
        removed = 0
        try:
            cutoff = (datetime.now() - timedelta(days=days)).timestamp()
            for log_file in Path(log_dir).glob("*.log.*"):
                if log_file.stat().st_mtime < cutoff:
                    log_file.unlink()
                    removed += 1
                    logger.debug(f"删除旧日志文件: {log_file}")
        except OSError as e:
            logger.warning(f"清理日志文件失败: {e}")
        return removed
