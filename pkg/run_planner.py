#!/usr/bin/env python3
"""
Run the CoMPlan planner CLI
Puts shared/ and the planner service on PYTHONPATH and forwards all arguments
"""
import os
import subprocess
import sys
from pathlib import Path


def venv_python(project_root: Path) -> Path:
    """Interpreter of the project venv, or the current one if no venv exists"""
    venv_path = project_root / "venv"
    if os.name == 'nt':  # Windows
        candidate = venv_path / "Scripts" / "python.exe"
    else:  # Linux/Mac
        candidate = venv_path / "bin" / "python"
    return candidate if candidate.exists() else Path(sys.executable)


def main() -> int:
    project_root = Path(__file__).parent
    service_path = project_root / "services" / "planner-service"
    if not service_path.exists():
        print(f"Error: Service directory not found: {service_path}", file=sys.stderr)
        return 1

    env = os.environ.copy()
    env["PYTHONPATH"] = os.pathsep.join([str(project_root), str(service_path)])

    # Unbuffered so progress logs interleave with CSV output in order
    cmd = [str(venv_python(project_root)), "-u", "-m", "app.main", *sys.argv[1:]]
    return subprocess.run(cmd, cwd=project_root, env=env).returncode


if __name__ == "__main__":
    sys.exit(main())
