"""
🕸️ 有向网络隐私发布与 p0 模型估计工具 - 程序入口
主程序入口点
"""

import logging
import os
import sys
from pathlib import Path

# 添加项目根目录到Python路径
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from modules.config import CONFIG, get_config
from modules.utils import LogUtils, SystemUtils


def setup_environment() -> bool:
    """设置运行环境"""
    try:
        os.environ['PYTHONIOENCODING'] = 'utf-8'
        os.environ['PYTHONUTF8'] = '1'

        config = get_config()
        LogUtils.setup_logging(
            log_level=CONFIG.get('system.log_level', 'INFO'),
            log_dir=config.resolve_path('system.log_dir', 'logs'),
            max_files=CONFIG.get('system.max_log_files', 10),
            color=CONFIG.get('system.color_console', True)
        )

        logger = logging.getLogger(__name__)
        sys_info = SystemUtils.get_system_info()
        logger.debug(f"{config.get('app.name')} {config.get('app.version')} | "
                     f"{sys_info.get('system', 'Unknown')} {sys_info.get('release', '')} | "
                     f"Python {sys_info.get('python_version', 'Unknown')} | "
                     f"物理核数 {sys_info.get('physical_cores')}")

        config.create_directories()
        LogUtils.clear_old_logs(config.resolve_path('system.log_dir', 'logs'))
        return True

    except Exception as e:
        logging.error(f"环境设置失败: {e}")
        return False


def main() -> int:
    """主函数"""
    from modules.cli import main as cli_main

    setup_environment()
    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
