"""Example application configuration for weak-measurement-info.

To use this configuration:
    cp app.example.py app.py

Then edit app.py to customize executor settings.

To run the server:
    uv run uvicorn app:app --host 0.0.0.0 --port 8000

For development with auto-reload:
    uv run uvicorn app:app --host 0.0.0.0 --port 8000 --reload
"""

from weak_measurement_info import create_app
from weak_measurement_info.executors import AerExecutor, BaseExecutor, NumpyExecutor

# ==============================================================================
# Executor Configuration
# ==============================================================================

executors: dict[str, BaseExecutor] = {
    "numpy": NumpyExecutor(
        max_workers=4,  # Threads per run; results do not depend on this
    ),
    # Model II only, pure initial states
    "aer": AerExecutor(
        max_parallel_threads=0,  # 0 = auto-detect (use all CPUs)
        method="statevector",
    ),
}

# ==============================================================================
# Advanced: Dynamic Configuration
# ==============================================================================

# Example: Adjust worker count based on CPU count
# cpu_count = os.cpu_count() or 1
# executors["numpy"] = NumpyExecutor(max_workers=max(1, cpu_count - 2))

# ==============================================================================
# Create Application
# ==============================================================================

app = create_app(executors=executors)

# The 'app' object is used by uvicorn:
#   uv run uvicorn app:app --host 0.0.0.0 --port 8000
