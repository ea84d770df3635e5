"""
🌐 数据集客户端模块
下载 UC Irvine 消息网络（SNAP CollegeMsg 公开边列表），带重试与指数退避
"""

import gzip
import logging
import time
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Union

import requests

from .config import CONFIG
from .errors import DatasetMissingError

logger = logging.getLogger(__name__)


class DatasetClient:
    """UC Irvine 数据集客户端"""

    def __init__(self, url: Optional[str] = None, target_path: Optional[Union[str, Path]] = None):
        self.url = url or CONFIG.get('experiments.dataset_url', 'https://snap.stanford.edu/data/CollegeMsg.txt.gz')
        self.target_path = Path(target_path) if target_path else CONFIG.resolve_path(
            'experiments.dataset_path', 'data/uci/CollegeMsg.txt')
        self.timeout = CONFIG.get('experiments.download_timeout', 120)
        self.max_retries = CONFIG.get('experiments.download_retries', 3)
        self.retry_delay = CONFIG.get('experiments.retry_delay', 2)

    def download_hint(self) -> str:
        """缺少数据集时给用户的提示"""
        return (f"请从 {self.url} 下载并解压到 {self.target_path}，"
                f"或运行 analyze --download 自动获取")

    def ensure_available(self, path: Optional[Union[str, Path]] = None) -> Path:
        """
        确认数据集文件存在

        Raises:
            DatasetMissingError: 文件不存在（附带下载提示）
        """
        path = Path(path) if path else self.target_path
        if not path.exists():
            logger.error(f"数据集不存在: {path}")
            raise DatasetMissingError(path, self.download_hint())
        return path

    def download(self, force: bool = False, progress_callback: Callable = None) -> Dict[str, Any]:
        """
        下载并解压数据集

        Args:
            force: 已存在时是否重新下载
            progress_callback: 进度回调 (百分比, 消息)

        Returns:
            结果字典 {'success', 'path', 'bytes'} 或 {'success': False, 'error'}
        """
        if self.target_path.exists() and not force:
            logger.info(f"数据集已存在，跳过下载: {self.target_path}")
            return {'success': True, 'path': str(self.target_path), 'bytes': self.target_path.stat().st_size,
                    'skipped': True}

        logger.info(f"🌐 开始下载数据集: {self.url}")
        response = self._request_with_retry(progress_callback)
        if not response['success']:
            logger.error(f"❌ 数据集下载失败: {response['error']}")
            return response

        payload = response['content']
        if self.url.endswith('.gz'):
            try:
                payload = gzip.decompress(payload)
            except OSError as e:
                return {'success': False, 'error': f'解压失败: {e}'}

        self.target_path.parent.mkdir(parents=True, exist_ok=True)
        self.target_path.write_bytes(payload)
        if progress_callback:
            progress_callback(100, "下载完成")
        logger.info(f"✅ 数据集已保存: {self.target_path} ({len(payload)} 字节)")
        return {'success': True, 'path': str(self.target_path), 'bytes': len(payload), 'skipped': False}

    def _request_with_retry(self, progress_callback: Callable = None) -> Dict[str, Any]:
        """带重试机制的请求"""
        last_error = None

        for attempt in range(self.max_retries):
            if progress_callback:
                progress_callback(10, f"下载中... (尝试 {attempt + 1}/{self.max_retries})")
            try:
                response = requests.get(self.url, timeout=self.timeout)
                if response.status_code == 200:
                    return {'success': True, 'content': response.content}
                last_error = f'HTTP {response.status_code}'
            except requests.exceptions.Timeout:
                last_error = '请求超时'
            except requests.exceptions.RequestException as e:
                last_error = str(e)
            logger.warning(f"下载失败 (尝试 {attempt + 1}/{self.max_retries}): {last_error}")

            if attempt < self.max_retries - 1:
                wait_time = self.retry_delay * (2 ** attempt)
                logger.info(f"等待 {wait_time} 秒后重试...")
                time.sleep(wait_time)

        return {
            'success': False,
            'error': f'请求失败，已重试 {self.max_retries} 次: {last_error}'
        }
