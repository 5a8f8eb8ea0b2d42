import pytest

from opconsole.actions import ActionTree, CallStyle, FolderNode, ActionRef, MessageAction, ToggleAction
from opconsole.config import CameraConfig, CameraPair, ConsoleConfig, SensorConfig, ViewDefaults
from opconsole.params import ParamKind, SettingsParameter


def build_demo_config():
    """A config exercising every section: cameras, pairs, actions incl. a
    feedback toggle, a settings alias, and a classified sensor."""
    actions = [
        MessageAction(display_name="LED off", id="led_off", channel="robot/led",
                      call_style=CallStyle.SERVICE, payload={"brightness": 0.0}),
        MessageAction(display_name="LED half", id="led_half", channel="robot/led",
                      call_style=CallStyle.SERVICE, payload={"brightness": 0.5}),
        MessageAction(display_name="LED full", id="led_full", channel="robot/led",
                      call_style=CallStyle.SERVICE, payload={"brightness": 1.0}),
        ToggleAction(display_name="Toggle LED", id="led", children=["led_off", "led_half", "led_full"],
                     feedback_channel="robot/led_state",
                     state_extractor="{0.0: 0, 0.5: 1, 1.0: 2}[message['brightness']]"),
        MessageAction(display_name="Unfold Arm", id="unfold", channel="robot/arm_pose",
                      call_style=CallStyle.SERVICE, payload={"pose": "unfolded"}),
        MessageAction(display_name="Park Arm", id="park", channel="robot/arm_pose",
                      call_style=CallStyle.SERVICE, payload={"pose": "parked"}),
        MessageAction(display_name="Drive To Waypoint", id="drive_to", channel="robot/drive_to",
                      call_style=CallStyle.SERVICE,
                      payload_script="{'x': tool['waypoint']['x'], 'y': tool['waypoint']['y'], 'tol': 0.2}",
                      timeout_s=30.0),
        MessageAction(display_name="Look At Point", id="look_at", channel="robot/look_at",
                      call_style=CallStyle.SERVICE,
                      payload_script="{'point': tool['lookat']['point'], 'direction': tool['lookat']['direction'], 'standoff': 0.3}"),
        MessageAction(display_name="Inspect Victim", id="inspect", channel="robot/inspect_victim",
                      call_style=CallStyle.SERVICE, payload={}, timeout_s=30.0),
        MessageAction(display_name="Manipulation Mode", id="manip_mode", channel="robot/set_mode",
                      call_style=CallStyle.SERVICE, payload={"mode": "manipulation"}),
    ]
    tree = ActionTree(
        root=FolderNode(
            name="root",
            items=[
                FolderNode(name="Manipulation", items=[ActionRef("unfold"), ActionRef("park"), ActionRef("led")]),
                FolderNode(name="Navigation", items=[ActionRef("drive_to")]),
                ActionRef("led"),
            ],
        )
    )
    return ConsoleConfig(
        cameras=[
            CameraConfig(id="cam1", name="Front", channel="camera/front/frame"),
            CameraConfig(id="cam2", name="Rear", channel="camera/rear/frame"),
        ],
        camera_pairs=[CameraPair(name="Driving", left="cam1", right="cam2")],
        actions=actions,
        action_tree=tree,
        settings=[
            SettingsParameter(path="planner/max_vel_x", display_alias="Driving speed",
                              kind=ParamKind.FLOAT, value=0.5, minimum=0.0, maximum=1.0),
            SettingsParameter(path="lights/headlamp", display_alias="Headlamp",
                              kind=ParamKind.BOOL, value=False),
        ],
        sensors=[SensorConfig(name="co2", unit="ppm", warn_threshold=1000.0, danger_threshold=5000.0)],
        view=ViewDefaults(),
    )


@pytest.fixture
def demo_config():
    return build_demo_config()
