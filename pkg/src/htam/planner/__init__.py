from .baselines import DebateSchedule, plan_cot, plan_debate, plan_plan_execute, plan_react
from .htam import HtamSettings, Selection, parse_selection, plan_htam, select_layer
from .plan import ARCHITECTURES, Exchange, Plan, PlanStep, Session
from .registry import Registry, SubAgentSpec

__all__ = [
    "ARCHITECTURES",
    "DebateSchedule",
    "Exchange",
    "HtamSettings",
    "Plan",
    "PlanStep",
    "Registry",
    "Selection",
    "Session",
    "SubAgentSpec",
    "parse_selection",
    "plan_cot",
    "plan_debate",
    "plan_htam",
    "plan_plan_execute",
    "plan_react",
    "select_layer",
]
