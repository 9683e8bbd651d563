/** View model unit tests against a scripted mock transport. */

import { describe, expect, it } from "vitest";
import { SessionClient, ShapeSnapshot, Transport } from "../src/protocol.js";
import { ExplorerViewModel } from "../src/viewmodel.js";

function snapshot(z: number, n = 2): ShapeSnapshot {
  const eye = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
  return {
    lattice: true,
    centers: Array.from({ length: n }, (_, i) => [2 * i + 1, 1, z]),
    orientations: Array.from({ length: n }, () => eye),
  };
}

class MockTransport implements Transport {
  onmessage: ((event: { data: any }) => void) | null = null;
  onopen = null;
  onerror = null;
  onclose = null;
  sent: any[] = [];

  send(data: string) {
    const msg = JSON.parse(data);
    this.sent.push(msg);
    const reply = (kind: string, payload: object) =>
      this.onmessage?.({ data: JSON.stringify({ seq: msg.seq, kind, payload }) });
    switch (msg.kind) {
      case "hello":
        reply("hello", { schema: "metamorph-proto/1", version: 1 });
        break;
      case "load_design":
        reply("state", {
          node_key: "K_A", gamma_deg: [180, 180], shape: snapshot(1),
          history_depth: 0,
          branches: [{ branch_id: "b0", changed_hinges: [0], targets_deg: {},
                       path_dof: 1, to_key: "K_B" }],
        });
        break;
      case "apply_branch":
        if (msg.payload.branch_id !== "b0") {
          reply("error", { message: "unknown branch id" });
          break;
        }
        this.onmessage?.({
          data: JSON.stringify({
            seq: msg.seq, kind: "animate_frames",
            payload: { frames: [snapshot(2), snapshot(3)] },
          }),
        });
        reply("state", {
          node_key: "K_B", gamma_deg: [90, 180], shape: snapshot(3),
          history_depth: 1,
          branches: [{ branch_id: "b0", changed_hinges: [0], targets_deg: {},
                       path_dof: 1, to_key: "K_A" }],
        });
        break;
      case "undo":
        reply("state", {
          node_key: "K_A", gamma_deg: [180, 180], shape: snapshot(1),
          history_depth: 0,
          branches: [{ branch_id: "b0", changed_hinges: [0], targets_deg: {},
                       path_dof: 1, to_key: "K_B" }],
        });
        break;
      default:
        reply("error", { message: `unknown kind ${msg.kind}` });
    }
  }

  close() {}
}

describe("ExplorerViewModel", () => {
  async function loaded() {
    const transport = new MockTransport();
    const rendered: ShapeSnapshot[] = [];
    const notices: string[] = [];
    const vm = new ExplorerViewModel(new SessionClient(transport), {
      onRender: (s) => rendered.push(s),
      onNotice: (m) => notices.push(m),
    });
    await vm.connect();
    await vm.loadDesign("canonical");
    return { vm, transport, rendered, notices };
  }

  it("connects and adopts the loaded state", async () => {
    const { vm } = await loaded();
    expect(vm.connection).toBe("loaded");
    expect(vm.nodeKey).toBe("K_A");
    expect(vm.branches).toHaveLength(1);
    expect(vm.branches[0].path_dof).toBe(1);
  });

  it("plays streamed frames then adopts the branch end state", async () => {
    const { vm, rendered } = await loaded();
    await vm.selectBranch("b0");
    expect(vm.nodeKey).toBe("K_B");
    // pre-move snapshot + 2 streamed frames buffered for scrubbing
    expect(vm.animation).toHaveLength(3);
    expect(rendered.length).toBeGreaterThanOrEqual(3);
    // branch list refreshed from the new node
    expect(vm.branches[0].to_key).toBe("K_A");
  });

  it("scrubs the timeline deterministically", async () => {
    const { vm } = await loaded();
    await vm.selectBranch("b0");
    expect(vm.scrubTimeline(0)!.centers[0][2]).toBe(1);   // pre-move
    expect(vm.scrubTimeline(1)!.centers[0][2]).toBe(3);   // post-move
    expect(vm.scrubTimeline(0.5)!.centers[0][2]).toBe(2); // midpoint frame
    expect(vm.scrubTimeline(7)!.centers[0][2]).toBe(3);   // clamped
    expect(vm.timelinePosition).toBe(1);
  });

  it("leaves state untouched on stale branch", async () => {
    const { vm, notices } = await loaded();
    await vm.selectBranch("b0");
    await expect(vm.selectBranch("b999")).rejects.toThrow();
    expect(vm.nodeKey).toBe("K_B");
    expect(notices.length).toBeGreaterThan(0);
  });

  it("undo restores the previous node", async () => {
    const { vm } = await loaded();
    await vm.selectBranch("b0");
    await vm.undo();
    expect(vm.nodeKey).toBe("K_A");
    expect(vm.snapshot!.centers[0][2]).toBe(1);
  });

  it("rejects foreign protocol schemas", async () => {
    const transport = new MockTransport();
    transport.send = function (data: string) {
      const msg = JSON.parse(data);
      this.onmessage?.({
        data: JSON.stringify({ seq: msg.seq, kind: "hello",
                               payload: { schema: "other/9" } }),
      });
    };
    const vm = new ExplorerViewModel(new SessionClient(transport));
    await expect(vm.connect()).rejects.toThrow(/unsupported protocol/);
  });
});
