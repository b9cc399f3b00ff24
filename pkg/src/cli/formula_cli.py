"""
formula command: bound-escalation verdict for a prenex formula
"""

import logging

from src.cli.common import ExitCode, emit, positive_option, settings_for
from src.cli.run_cli import VERDICT_EXIT
from src.core.hierarchy import BoundAssignment, BoundSchedule, escalate_bounds, parse_formula
from src.core.utils import exact_value, parse_input_literal, read_text_arg

logger = logging.getLogger(__name__)


def _schedule(args, settings, k: int) -> BoundSchedule:
    levels = tuple(settings.hierarchy.levels if args.levels is None else args.levels)
    confirmations = positive_option(args.confirmations, settings.hierarchy.confirmations, "--confirmations")
    if not args.final_caps:
        return BoundSchedule.default(k, levels, confirmations)
    if len(args.final_caps) != len(levels):
        raise ValueError("--final-caps needs one cap per level")
    stages = tuple(BoundAssignment((level,) * max(k - 1, 0), cap)
                   for level, cap in zip(levels, args.final_caps))
    return BoundSchedule(stages, confirmations)


def cmd_formula(args) -> int:
    settings = settings_for(args)
    formula = parse_formula(read_text_arg(args.formula).strip())
    inp = parse_input_literal(args.input)
    schedule = _schedule(args, settings, formula.k)
    budget = positive_option(args.budget, settings.hierarchy.budget, "--budget")

    verdict = escalate_bounds(formula, inp, schedule, budget)
    if verdict.lagging:
        logger.warning("final cap does not outpace the prefix bounds; verdicts may be wrong")

    if args.format != "jsonl":
        for e in verdict.evidence:
            print(f"  bounds={list(e.bounds)} final_cap={e.final_cap} -> {str(e.truth).lower()}")

    human = verdict.kind.value
    if verdict.stabilized:
        human += f" {str(verdict.truth).lower()}"
    emit(args, human,
         event='formula',
         formula=str(formula),
         input=exact_value(inp),
         budget=budget,
         confirmations=schedule.confirmations,
         **verdict.to_dict())
    return VERDICT_EXIT[verdict.kind]
