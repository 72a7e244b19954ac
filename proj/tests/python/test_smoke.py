import json

import pytest

import zoomrl


def test_iou_and_penalty():
    assert zoomrl.iou((0, 0, 0.5, 0.5), (0, 0, 0.5, 0.5)) == 1.0
    assert zoomrl.iou((0, 0, 0.5, 0.5), (0.25, 0.25, 0.75, 0.75)) == pytest.approx(1 / 7)
    box = (0.1, 0.1, 0.4, 0.4)
    assert zoomrl.redundancy_penalty([box, box]) == pytest.approx(-0.1)
    assert zoomrl.redundancy_penalty([box, None, box, None]) == pytest.approx(-0.1)
    assert zoomrl.compose((0.5, 0.5, 1, 1), (0, 0, 0.5, 0.5)) == (0.5, 0.5, 0.75, 0.75)


def test_reward_gating():
    box = (0.1, 0.1, 0.4, 0.4)
    assert zoomrl.score_boxes(True, [box, box])["total"] == 1.0
    assert zoomrl.score_boxes(False, [box])["total"] == 0.0
    wrong = zoomrl.score_boxes(False, [box, box])
    assert wrong["total"] == pytest.approx(-0.1)
    assert wrong["penalty_active"]


def test_advantages():
    assert zoomrl.group_advantages([1.0, 0.0]) == [1.0, -1.0]
    assert zoomrl.group_advantages([0.5, 0.5, 0.5]) == [0.0, 0.0, 0.0]
    with pytest.raises(zoomrl.ZoomRLError) as err:
        zoomrl.group_advantages([1.0])
    assert err.value.code == "GroupTooSmall"


def test_protocol():
    prompt = zoomrl.system_prompt()
    assert "image_zoom_in_tool" in prompt and "<tool_call>" in prompt
    assert zoomrl.parse_bbox_string("<box>(0.1,0.2),(0.6,0.8)</box>") == (0.1, 0.2, 0.6, 0.8)
    with pytest.raises(zoomrl.ZoomRLError) as err:
        zoomrl.parse_bbox_string("<box>(0.6,0.2),(0.1,0.8)</box>")
    assert err.value.code == "EmptyBox"

    text = zoomrl.serialize_tool_call(2, (0.25, 0.5, 0.75, 1.0))
    assert text.startswith("<tool_call>")
    assert "label" not in text
    turn = zoomrl.parse_assistant_turn("thinking\n" + text)
    assert turn["kind"] == "tool_call"
    assert turn["image_idx"] == 2
    assert turn["bbox"] == pytest.approx((0.25, 0.5, 0.75, 1.0))
    assert zoomrl.parse_assistant_turn("The answer is 3.")["text"] == "The answer is 3."
    assert "Image 2 (cropped from Image 1) is provided." in zoomrl.format_tool_response(2, 1)


def test_scene_render_and_episode():
    scene = zoomrl.generate_scene(7, "hard")
    assert sum(c["is_target"] for c in scene.cells) == 1
    qa = zoomrl.make_qa(scene)
    assert zoomrl.verify_answer(scene, "  " + qa["answer"] + " ")
    assert not zoomrl.legibility_oracle(scene, (0, 0, 1, 1))
    assert zoomrl.legibility_oracle(scene, qa["target_region"])

    img = zoomrl.render(scene, (0, 0, 1, 1), 64, 48)
    assert img.shape == (48, 64, 3)
    assert img.dtype.name == "uint8"

    traj = zoomrl.run_episode(scene, "expert", seed=7)
    assert traj["final_answer"] == qa["answer"]
    assert traj["reward"]["total"] == 1.0
    assert traj["T"] >= 2


def test_stages(tmp_path):
    config = "\n".join([
        "train_easy = 2", "train_medium = 2", "train_hard = 8",
        "eval_easy = 3", "eval_medium = 3", "eval_hard = 5",
        "coldstart_easy = 2", "coldstart_medium = 2", "coldstart_hard = 4",
        "bc_epochs = 5", "rl_steps = 2", "batch_prompts = 2", "group_size = 2",
    ])
    data = tmp_path / "data"
    zoomrl.gen_data(data, config)
    assert (data / "eval_hard.jsonl").read_text().count("\n") == 5

    losses = zoomrl.coldstart(data, tmp_path / "cold", config)
    assert losses[-1] <= losses[0]
    csv = zoomrl.train_rl(data, tmp_path / "cold" / "params.json", tmp_path / "rl", config)
    assert csv.splitlines()[0].startswith("step,mean_reward")
    report = zoomrl.evaluate(data, str(tmp_path / "rl" / "params.json"), tmp_path / "eval", config)
    assert [s["split"] for s in report["splits"]] == ["easy", "medium", "hard"]
    assert json.loads((tmp_path / "eval" / "report.json").read_text()) == report

    with pytest.raises(zoomrl.ZoomRLError) as err:
        zoomrl.normalize_config("bogus = 1")
    assert err.value.code == "BadConfig"
