"""metamorph: kinematics and configuration-space engine for hierarchical
cube-based origami metastructures."""

from .errors import *  # noqa: F401,F403
from .model import (DesignSpec, Structure, CubeElement, HingeSpec,
                    build_structure, enumerate_designs, flip_link,
                    reference_shape, save_design, load_design,
                    canonical_design_key, hinge_count, link_count, cube_count)
from .kinematics import (FoldState, KinematicsReport, KinePath, hinge_transform,
                         loop_residual, solve_closure, dof_analysis,
                         detect_bifurcation, continue_path, forward_placement,
                         level2_link_length, closed_form_8r, printed_8r_relation)
from .shapespace import (ShapeMatrix, ConfigNode, TransitionGraph, canonicalize,
                         check_collision, check_path_collision, enumerate_moves,
                         build_transition_graph, graph_metrics, find_path,
                         detect_isl, export_mesh_obj, save_graph)
from .invdesign import (TargetShape, ShapeDatabase, MatchResult, voxelize_target,
                        build_database, match_shape, plan_reconfiguration,
                        save_database, load_database)
from .actuation import (ActuatorAssignment, MotorSchedule, PathSpec,
                        assign_actuators, compile_schedule, export_commands,
                        parse_commands, paths_from_edges)
from . import canonical

__version__ = "0.1.0"
