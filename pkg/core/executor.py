import os
import logging
from queue import Queue, Empty
from threading import Thread, Event
from . import log_utils
from .errors import GevreyError, TaskExecutionError
module_logger = log_utils.logger

THREADS_VARIABLE = 'GEVREYCH_THREADS'


def _env_thread_cap():
    value = os.environ.get(THREADS_VARIABLE)
    if value is None or value.strip() == '':
        return None
    try:
        cap = int(value)
    except ValueError:
        raise TaskExecutionError('{0} must be a positive integer, got {1!r}'.format(THREADS_VARIABLE, value), errno=2)
    if cap < 1:
        raise TaskExecutionError('{0} must be a positive integer, got {1!r}'.format(THREADS_VARIABLE, value), errno=2)
    return cap


# worker loop: pick tasks until the queue is empty or the run is cancelled
def _worker(func, task_queue, result_queue, cancel_event):
    while not cancel_event.is_set():
        try:
            index, args = task_queue.get_nowait()
        except Empty:
            return
        try:
            result_queue.put((index, True, func(*args)))
        except Exception as e:  # noqa: B902 reported back to the main thread
            result_queue.put((index, False, e))


class Executor(object):
    workers = 1
    logger = module_logger
    progress = False
    poll_interval = 0.2

    # initialise
    def __init__(self, workers=None, logger=False, progress=False):
        """Thread pool for independent tasks (sweep cells, trials, epsilon branches)

        Arguments:
        -----------
        workers : int, optional (default : None)\n
            number of worker threads. If None, the number of CPUs is used.
            The environment variable GEVREYCH_THREADS caps this value in any case
        logger : logging.Logger, optional (default : False)
            If False, it will default to the package logger
            If None, logging will be disabled for anything but ERROR and CRITICAL levels
        progress : bool, optional (default : False)
            show a ProgressBar on stdout while tasks complete

        Returns:
        -----------
        out : Executor instance
            use Executor.map(func, tasks) to run the tasks
        """
        self.set_workers(workers)
        self.set_logger(logger)
        self.set_progress(progress)

    # method to set the number of worker threads
    def set_workers(self, workers):
        if workers is None:
            workers = os.cpu_count() or 1
        if isinstance(workers, bool) or not isinstance(workers, int):
            raise TypeError("The argument 'workers' must be an integer or None")
        if workers < 1:
            raise ValueError("The argument 'workers' must be >= 1, got {0}".format(workers))
        cap = _env_thread_cap()
        if cap is not None and workers > cap:
            workers = cap
        self.workers = workers

    def set_progress(self, progress):
        if not isinstance(progress, bool):
            raise TypeError("The argument 'progress' must be a boolean")
        self.progress = progress

    def set_logger(self, i_logger):
        """Method to set up the Logger used by the object

        Arguments:
        -----------
        i_logger : logging.Logger
            if False, the package logger is used
            if None, DEBUG, INFO and WARNING will be suppressed, allowing only ERROR and CRITICAL
        """
        if isinstance(i_logger, logging.Logger):
            self.logger = i_logger
        elif i_logger is None:
            # private child, the package logger keeps its level
            self.logger = module_logger.getChild('executor.quiet')
            self.logger.setLevel(logging.ERROR)
        elif i_logger is False:
            self.logger = module_logger
        else:
            raise TypeError("The argument 'logger' must be a Logger object, None or False")

    # method to summarise attributes currently set for this instance
    def info(self):
        """Method to print all parameters
        """
        self.logger.info('Current settings are:')
        self._info_printer('workers', str(self.workers))
        self._info_printer('progress bar', str(self.progress))
        self._info_printer('poll interval', '{0}s'.format(self.poll_interval))
        self._info_printer(THREADS_VARIABLE, str(os.environ.get(THREADS_VARIABLE, 'unset')))

    # internal method to print the info
    def _info_printer(self, head, to_print):
        if isinstance(to_print, str):
            self.logger.info('   %-20s: %-20s' % (head, to_print))
        elif isinstance(to_print, list):
            for s in to_print:
                self.logger.info('   %-20s: %-20s' % (head, s))
                head = ''

    @staticmethod
    def _wrap_error(index, error, description):
        errno = error.errno if isinstance(error, GevreyError) else 1
        message = 'task {0} of {1} failed: {2}: {3}'.format(index, description or 'run', type(error).__name__, error)
        wrapped = TaskExecutionError(message, errno=errno, task_index=index)
        wrapped.__cause__ = error
        return wrapped

    # core method
    def map(self, func, tasks, description=None):
        """Run func(*args) for every args in tasks

        Results come back in the order of tasks whatever the number of workers.
        The first failure cancels the remaining tasks and is raised as TaskExecutionError,
        keeping the errno of the original error.
        """
        tasks = list(tasks)
        if len(tasks) == 0:
            return []
        if description:
            self.logger.debug('   {0}: {1} tasks on {2} workers'.format(description, len(tasks), min(self.workers, len(tasks))))
        bar = log_utils.ProgressBar(max_items=len(tasks), completed_items=0) if self.progress else None
        try:
            if self.workers == 1 or len(tasks) == 1:
                results = []
                for i, args in enumerate(tasks):
                    try:
                        results.append(func(*args))
                    except Exception as e:
                        raise self._wrap_error(i, e, description)
                    if bar is not None:
                        bar.update(i + 1)
                return results
            return self._thread_handler(func, tasks, description, bar)
        finally:
            if bar is not None:
                bar.close()

    def _thread_handler(self, func, tasks, description, bar):
        task_queue = Queue()
        for item in enumerate(tasks):
            task_queue.put(item)
        result_queue = Queue()
        cancel_event = Event()
        threads = []
        for _ in range(min(self.workers, len(tasks))):
            t = Thread(target=_worker, args=(func, task_queue, result_queue, cancel_event))
            t.daemon = True
            t.start()
            threads.append(t)

        results = [None] * len(tasks)
        completed = 0
        try:
            while completed < len(tasks):
                try:
                    index, ok, value = result_queue.get(timeout=self.poll_interval)
                except Empty:
                    if not any(t.is_alive() for t in threads) and result_queue.empty():
                        raise TaskExecutionError('all workers stopped with {0} of {1} tasks completed'.format(completed, len(tasks)))
                    continue
                if not ok:
                    cancel_event.set()
                    raise self._wrap_error(index, value, description)
                results[index] = value
                completed += 1
                if bar is not None:
                    bar.update(completed)
        except KeyboardInterrupt:
            cancel_event.set()
            self.logger.warning('   Detected user cancellation')
            raise
        finally:
            cancel_event.set()
            for t in threads:
                t.join(timeout=self.poll_interval)
        return results
