"""
Console progress and summary text for eigencomplete runs
"""
from typing import Dict, List


def create_processing_steps(steps: List[str]) -> str:
    """Numbered list of the steps a run went through"""
    return "\n".join(f"  {i + 1}. {step}" for i, step in enumerate(steps))


def create_error_list(errors: List[str]) -> str:
    return "\n".join(f"  error: {error}" for error in errors)


def create_run_summary(results: Dict, verbose: bool = False) -> str:
    """
    Text printed after a run or preset
    Result lines always; processing steps only when verbose
    """
    status_labels = {0: 'ok', 2: 'invalid input', 3: 'did not converge'}
    lines = []

    runs = results.get('runs') or [results]
    for run in runs:
        lines.extend(run.get('stdout', []))
        if run.get('partial'):
            lines.append("  (partial result, see numerics_report)")

    if verbose and results.get('processing_steps'):
        lines.append("steps:")
        lines.append(create_processing_steps(results['processing_steps']))

    if results.get('artifacts'):
        lines.append(f"wrote {len(results['artifacts'])} files:")
        lines.extend(f"  {path}" for path in results['artifacts'])

    if results.get('errors'):
        lines.append(create_error_list(results['errors']))

    code = results.get('exit_code', 0)
    lines.append(f"status: {status_labels.get(code, 'failed')} (exit {code})")
    return "\n".join(lines)
