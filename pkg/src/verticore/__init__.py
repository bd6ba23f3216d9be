"""Verticore: a deterministic runtime for vertical AI agent patterns.

Four core modules (memory, reasoning, skills, knowledge tools) compose
three agentic pipelines: a domain-routing RAG agent, an orchestrated
multi-agent retriever, and a human-in-the-loop reviewer, all behind an
event-sourced service with exact replay.
"""

from verticore.config import Config, load_config
from verticore.runtime import Runtime, replay

__all__ = ["Config", "load_config", "Runtime", "replay"]
__version__ = "0.1.0"
