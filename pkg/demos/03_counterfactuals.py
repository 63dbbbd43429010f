"""The three counterfactual task constructions, applied to household tasks."""

from nsplan.counterfactual import (
    intervene_final_goal,
    intervene_initial_configuration,
    intervene_intermediate_step,
)
from nsplan.programs import TaskSample

watch_tv = TaskSample(
    task="Watch TV",
    reference_plan=(
        "find remote control",
        "grab remote control",
        "find television",
        "switch on television",
        "watch television",
    ),
    domain="household",
)

work = TaskSample(
    task="Work",
    reference_plan=(
        "walk to home office",
        "sit on chair",
        "find computer",
        "switch on computer",
        "look at computer",
    ),
    domain="household",
)

light = TaskSample(
    task="Turn light off",
    reference_plan=("walk to bedroom", "walk to light", "switch off light"),
    domain="household",
)

# 1. Constrain the initial configuration: name a start location and walk there first.
cf = intervene_initial_configuration(watch_tv, "bedroom")
print(cf.modified.task)
for s in cf.modified.reference_plan:
    print("  ", s)

# 2. Pin an intermediate step into the goal (step sampled by seed; plan unchanged).
print()
cf = intervene_intermediate_step(work, rng_seed=7)
print(f"{cf.modified.task}   (pinned step: {cf.payload!r})")

# 3. Join two final goals: both plans run back to back.
print()
cf = intervene_final_goal(light, work)
print(cf.modified.task)
for i, s in enumerate(cf.modified.reference_plan, 1):
    print(f"  {i}. {s}")
