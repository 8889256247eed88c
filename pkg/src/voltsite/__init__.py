"""voltsite: EV charging-station siting with agent-based simulation and dual deep Q-learning."""

__version__ = "0.1.0"
