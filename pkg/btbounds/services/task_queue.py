"""
Task Queue Service
Async worker pool running CPU-bound verification cases on a thread executor
"""

import asyncio
import logging
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

from btbounds.config import get_settings


logger = logging.getLogger(__name__)


class TaskStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class TaskQueue:
    """
    Async task queue for verification cases.

    Workers pull from an asyncio.Queue; plain functions run on a thread
    pool so the event loop stays responsive.
    """

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers or get_settings().threads
        self.queue: asyncio.Queue = asyncio.Queue()
        self.tasks: Dict[str, Dict] = {}
        self.workers: List[asyncio.Task] = []
        self.executor: Optional[ThreadPoolExecutor] = None
        self.running = False

    async def start(self):
        """Start the task queue workers"""
        if self.running:
            return

        self.running = True
        self.executor = ThreadPoolExecutor(max_workers=self.max_workers)
        self.workers = [
            asyncio.create_task(self._worker(i))
            for i in range(self.max_workers)
        ]

    async def stop(self):
        """Drain the queue, then cancel workers and shut the executor down"""
        await self.queue.join()
        self.running = False

        for worker in self.workers:
            worker.cancel()
        await asyncio.gather(*self.workers, return_exceptions=True)
        self.workers = []

        if self.executor:
            self.executor.shutdown(wait=True)
            self.executor = None

    async def _run(self, func: Callable, args: Tuple, kwargs: Dict) -> Any:
        if asyncio.iscoroutinefunction(func):
            return await func(*args, **kwargs)
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(self.executor, lambda: func(*args, **kwargs))

    async def _worker(self, worker_id: int):
        """Worker that processes tasks from the queue"""
        while self.running:
            try:
                task_id, func, args, kwargs = await self.queue.get()
            except asyncio.CancelledError:
                break

            task = self.tasks[task_id]
            task["status"] = TaskStatus.RUNNING
            task["started_at"] = datetime.utcnow()
            start = time.perf_counter()
            try:
                task["result"] = await self._run(func, args, kwargs)
                task["status"] = TaskStatus.COMPLETED
            except asyncio.CancelledError:
                self.queue.task_done()
                break
            except Exception as e:
                task["status"] = TaskStatus.FAILED
                task["error"] = str(e)
                task["exception"] = e
                logger.debug(f"Worker {worker_id}: task {task['name']} failed: {e}")
            finally:
                task["runtime"] = time.perf_counter() - start
                task["completed_at"] = datetime.utcnow()
            self.queue.task_done()

    async def enqueue(
        self,
        func: Callable,
        *args,
        task_name: str = None,
        **kwargs
    ) -> str:
        """
        Add a task to the queue.

        Args:
            func: Function to execute
            *args: Positional arguments for func
            task_name: Optional task name
            **kwargs: Keyword arguments for func

        Returns:
            Task ID
        """
        task_id = str(uuid.uuid4())

        self.tasks[task_id] = {
            "id": task_id,
            "name": task_name or func.__name__,
            "status": TaskStatus.PENDING,
            "created_at": datetime.utcnow(),
            "started_at": None,
            "completed_at": None,
            "runtime": None,
            "result": None,
            "error": None,
            "exception": None,
        }

        await self.queue.put((task_id, func, args, kwargs))
        return task_id

    def get_task_status(self, task_id: str) -> Dict:
        """Get task status and result"""
        return self.tasks.get(task_id, {"status": "not_found"})

    def get_queue_stats(self) -> Dict:
        """Get queue statistics"""
        counts = {status: 0 for status in TaskStatus}
        for t in self.tasks.values():
            counts[t["status"]] += 1

        return {
            "queue_size": self.queue.qsize(),
            "total_tasks": len(self.tasks),
            "pending": counts[TaskStatus.PENDING],
            "running": counts[TaskStatus.RUNNING],
            "completed": counts[TaskStatus.COMPLETED],
            "failed": counts[TaskStatus.FAILED],
            "workers": self.max_workers,
        }


async def run_all(jobs: List[Tuple[str, Callable, Tuple]], max_workers: Optional[int] = None) -> Dict[str, Dict]:
    """
    Run (name, func, args) jobs on a fresh queue.

    Returns:
        Task records keyed by job name
    """
    queue = TaskQueue(max_workers=max_workers)
    await queue.start()
    ids = {}
    for name, func, args in jobs:
        ids[name] = await queue.enqueue(func, *args, task_name=name)
    await queue.stop()
    return {name: queue.get_task_status(task_id) for name, task_id in ids.items()}
