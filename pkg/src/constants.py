"""Constants for function-calling dialogue state tracking."""

from enum import IntEnum
from pathlib import Path


class ExitCode(IntEnum):
    """Process exit codes."""

    SUCCESS = 0
    RUNTIME_ERROR = 1
    USAGE_ERROR = 2


RESOURCES_DIR = Path(__file__).resolve().parent.parent / "resources"
DEFAULT_CATALOG = RESOURCES_DIR / "schema" / "multiwoz21.json"
MULTIWOZ_DESCRIPTIONS = RESOURCES_DIR / "schema" / "multiwoz_descriptions.json"
TEMPLATE_REGISTRY = RESOURCES_DIR / "templates.json"
EXAMPLES_DIR = RESOURCES_DIR / "examples"

# Special tokens emitted and parsed around model output
FUNCTION_CALL_OPEN = "<function_call>"
FUNCTION_CALL_CLOSE = "</function_call>"
DOMAIN_OPEN = "<domain>"
DOMAIN_CLOSE = "</domain>"
FUNCTIONS_OPEN = "<FUNCTIONS>"
FUNCTIONS_CLOSE = "</FUNCTIONS>"
EXAMPLES_OPEN = "<EXAMPLES>"
EXAMPLES_CLOSE = "</EXAMPLES>"

SYSTEM_INSTRUCTION = (
    "You are a task-oriented assistant. "
    "You can use the given functions to fetch further data to help the users."
)
SELECTION_INSTRUCTION = (
    "Based on the conversation, determine which of the functions above the user needs. "
    f"Output only the chosen function name surrounded by {DOMAIN_OPEN} and {DOMAIN_CLOSE}."
)
MONOLITHIC_INSTRUCTION = (
    "In your reply, first call the appropriate function by writing "
    f"{FUNCTION_CALL_OPEN} followed by a JSON object with the keys \"function\" and "
    f"\"arguments\" and then {FUNCTION_CALL_CLOSE}, then respond to the user."
)
ARGUMENT_INSTRUCTION = (
    f"In your reply, first write {FUNCTION_CALL_OPEN} followed by a JSON object with the keys "
    f"\"function\" and \"arguments\" and then {FUNCTION_CALL_CLOSE}, then respond to the user."
)

TIME_FORMAT_HINT = "24-hour format hh:mm"

# Argument values that mean "unfilled"; dropped when a call updates the state
EMPTY_VALUES = frozenset({"", "none", "not mentioned"})
DONTCARE = "dontcare"
DONTCARE_VARIANTS = frozenset({"do nt care", "don't care", "dont care", "do not care", "dontcare"})

# Inference defaults
DEFAULT_TEMPERATURE = 0.3
DEFAULT_TOP_P = 0.2
DEFAULT_MAX_TOKENS = 128
SELECTION_MAX_TOKENS = 16

# Backend retry policy
MAX_ATTEMPTS = 3
BACKOFF_BASE_SECONDS = 1.0
DEFAULT_PARALLELISM = 4
DEFAULT_TIMEOUT_SECONDS = 60.0

API_KEY_ENV = "FNCTOD_API_KEY"
BASE_URL_ENV = "FNCTOD_BASE_URL"

DEFAULT_TEMPLATE = "plain"
DEFAULT_SEED = 42
DEFAULT_PER_DOMAIN = 200
