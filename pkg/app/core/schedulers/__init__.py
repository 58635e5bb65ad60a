from app.core.schedulers.base import Scheduler, SchedulerObservation, StepContext
from app.core.schedulers.factory import SCHEDULER_KINDS, build_scheduler

__all__ = ["Scheduler", "SchedulerObservation", "StepContext", "SCHEDULER_KINDS", "build_scheduler"]
