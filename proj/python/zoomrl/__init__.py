"""Python bindings for the zoomrl core library.

Boxes are ``(x1, y1, x2, y2)`` tuples in relative coordinates. Library errors
raise :class:`ZoomRLError`, whose ``code`` attribute holds the error name
(for example ``"MalformedBox"``).
"""

import json

from ._zoomrl import (
    Scene,
    ZoomRLError,
    coldstart,
    compose,
    default_config,
    evaluate as _evaluate,
    format_bbox_string,
    format_tool_response,
    gen_data,
    generate_scene,
    group_advantages,
    iou,
    legibility_oracle,
    make_qa,
    normalize_config,
    parse_assistant_turn,
    parse_bbox_string,
    redundancy_penalty,
    render,
    run_ablation,
    run_episode_jsonl,
    score_boxes,
    serialize_tool_call,
    system_prompt,
    train_rl,
    user_prompt,
    verify_answer,
)

__all__ = [
    "Scene",
    "ZoomRLError",
    "coldstart",
    "compose",
    "default_config",
    "evaluate",
    "format_bbox_string",
    "format_tool_response",
    "gen_data",
    "generate_scene",
    "group_advantages",
    "iou",
    "legibility_oracle",
    "make_qa",
    "normalize_config",
    "parse_assistant_turn",
    "parse_bbox_string",
    "redundancy_penalty",
    "render",
    "run_ablation",
    "run_episode",
    "score_boxes",
    "serialize_tool_call",
    "system_prompt",
    "train_rl",
    "user_prompt",
    "verify_answer",
]


def run_episode(scene, policy="expert", seed=0, **kwargs):
    """Runs one episode and returns its trajectory record as a dict."""
    return json.loads(run_episode_jsonl(scene, policy, seed, **kwargs))


def evaluate(data, policy, out, config=""):
    """Greedy evaluation on every eval split; returns the report dict."""
    return json.loads(_evaluate(data, policy, out, config))
