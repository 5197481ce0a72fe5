"""Prompt strategies rendered from Jinja2 templates."""

from .builder import ContextBudgetExceeded, Message, MissingContext, PromptPlan, Role, build  # noqa: F401
from .strategy import DColMode, DColOrder, NotDCoL, Strategy, StrategyTag, order_flip  # noqa: F401
