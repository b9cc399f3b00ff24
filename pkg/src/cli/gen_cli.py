"""
gen command: write a generated tower program and its sufficient plan
"""

from pathlib import Path

from src.cli.common import ExitCode, emit, settings_for
from src.core.assembler import ASR_SUFFIX, print_program, save_program
from src.core.programs import gen_general_tower, gen_tower, sufficient_general_plan, sufficient_plan
from src.core.utils import text_hash

PLAN_SUFFIX = ".plan"

GENERATORS = {
    'tower': (gen_tower, sufficient_plan, 'tower_cap'),
    'general-tower': (gen_general_tower, sufficient_general_plan, 'general_tower_cap'),
}


def cmd_gen(args) -> int:
    settings = settings_for(args)
    generate, plan_for, cap_key = GENERATORS[args.kind]

    # the plan refuses oversized parameters before anything is written
    plan = plan_for(args.x, getattr(settings.programs, cap_key))
    program = generate(args.x)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    asr_path = save_program(program, out_dir / f"{program.name}{ASR_SUFFIX}")
    plan_path = plan.save(out_dir / f"{program.name}{PLAN_SUFFIX}",
                          title=f"sufficient exponent plan for {program.name}")

    exponents = ", ".join(str(e) for e in plan.exponents)
    emit(args,
         f"wrote {asr_path} ({len(program)} instructions, {program.aln_sites()} ALN) "
         f"and {plan_path} plan=({exponents})",
         event='gen',
         kind=args.kind,
         x=args.x,
         program=program.name,
         program_hash=text_hash(print_program(program)),
         instructions=len(program),
         plan=list(plan.exponents),
         files=[str(asr_path), str(plan_path)])
    return ExitCode.OK
