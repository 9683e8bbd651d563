/**
 * Explorer view model: the single source of UI truth.
 *
 * All kinematics stays server-side: the view model only mirrors protocol
 * payloads (snapshot, branch list with DOF badges, animation buffer) and
 * never recomputes engine quantities. Timeline position 0 is the pre-move
 * state, 1 the post-move state; scrubbing is a deterministic buffer lookup.
 */

import { Branch, SessionClient, ShapeSnapshot, StatePayload, ProtocolError } from "./protocol.js";

export type ConnectionState = "idle" | "connected" | "loaded";

export interface ViewModelEvents {
  onRender?: (snapshot: ShapeSnapshot) => void;
  onBranches?: (branches: Branch[]) => void;
  onNotice?: (message: string) => void;
}

export class ExplorerViewModel {
  connection: ConnectionState = "idle";
  nodeKey: string | null = null;
  snapshot: ShapeSnapshot | null = null;
  branches: Branch[] = [];
  historyDepth = 0;

  /** Frames of the last completed move, including the pre-move snapshot. */
  animation: ShapeSnapshot[] = [];
  timelinePosition = 1.0;

  private client: SessionClient;
  private events: ViewModelEvents;

  constructor(client: SessionClient, events: ViewModelEvents = {}) {
    this.client = client;
    this.events = events;
  }

  private adopt(state: StatePayload) {
    this.nodeKey = state.node_key;
    this.snapshot = state.shape;
    this.historyDepth = state.history_depth;
    if (state.branches) {
      this.branches = state.branches;
      this.events.onBranches?.(this.branches);
    }
    this.events.onRender?.(state.shape);
  }

  async connect(): Promise<void> {
    const schema = await this.client.hello();
    if (schema !== "metamorph-proto/1") {
      throw new ProtocolError(`unsupported protocol schema ${schema}`);
    }
    this.connection = "connected";
  }

  async loadDesign(design: string | object = "canonical"): Promise<void> {
    const state = await this.client.loadDesign(design);
    this.connection = "loaded";
    this.animation = [];
    this.timelinePosition = 1.0;
    this.adopt(state);
  }

  async refreshBranches(): Promise<void> {
    this.branches = await this.client.listBranches();
    this.events.onBranches?.(this.branches);
  }

  /**
   * Apply a branch from the current list: streams playback frames, then
   * adopts the final engine state and its fresh branch list. On a server
   * error the scene and branch list are left untouched.
   */
  async selectBranch(branchId: string): Promise<void> {
    if (!this.branches.some((b) => b.branch_id === branchId)) {
      this.events.onNotice?.(`stale branch ${branchId}`);
      throw new ProtocolError(`stale branch ${branchId}`);
    }
    const pre = this.snapshot;
    const buffer: ShapeSnapshot[] = pre ? [pre] : [];
    try {
      const state = await this.client.applyBranch(branchId, (frames) => {
        for (const f of frames) {
          buffer.push(f);
          this.events.onRender?.(f);
        }
      });
      this.animation = buffer;
      this.timelinePosition = 1.0;
      this.adopt(state);
    } catch (err) {
      this.events.onNotice?.(String((err as Error).message ?? err));
      if (this.snapshot) this.events.onRender?.(this.snapshot);
      throw err;
    }
  }

  async undo(): Promise<void> {
    const state = await this.client.undo();
    this.animation = [];
    this.timelinePosition = 1.0;
    this.adopt(state);
  }

  /** Deterministic frame lookup; position clamps to [0, 1]. */
  scrubTimeline(position: number): ShapeSnapshot | null {
    if (!this.animation.length) return this.snapshot;
    const p = Math.min(1, Math.max(0, position));
    this.timelinePosition = p;
    const idx = Math.round(p * (this.animation.length - 1));
    const frame = this.animation[idx];
    this.events.onRender?.(frame);
    return frame;
  }
}
