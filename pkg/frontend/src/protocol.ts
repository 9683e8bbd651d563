/**
 * metamorph-proto/1 client.
 *
 * Requests carry a monotonically increasing sequence number; the server
 * answers each request with exactly one response (or error) echoing it,
 * optionally preceded by animate_frames notifications with the same seq.
 * The transport is injected so tests and node integration can supply a
 * `ws` socket while the browser uses the native WebSocket.
 */

export interface ShapeSnapshot {
  lattice: boolean;
  centers: number[][];
  orientations: number[][][];
}

export interface Branch {
  branch_id: string;
  changed_hinges: number[];
  targets_deg: Record<string, number>;
  path_dof: number;
  to_key: string;
}

export interface StatePayload {
  node_key: string;
  gamma_deg: number[];
  shape: ShapeSnapshot;
  history_depth: number;
  branches?: Branch[];
}

export interface ProtocolMessage {
  seq: number | null;
  kind: string;
  payload: any;
}

/** Minimal duck type satisfied by both browser WebSocket and `ws`. */
export interface Transport {
  send(data: string): void;
  close(): void;
  onmessage: ((event: { data: any }) => void) | null;
  onopen: ((event?: any) => void) | null;
  onerror: ((event?: any) => void) | null;
  onclose: ((event?: any) => void) | null;
  readyState?: number;
}

export class ProtocolError extends Error {}

interface Pending {
  resolve: (msg: ProtocolMessage) => void;
  reject: (err: Error) => void;
  onFrames?: (frames: ShapeSnapshot[]) => void;
}

export class SessionClient {
  private seq = 0;
  private pending = new Map<number, Pending>();
  private transport: Transport;

  constructor(transport: Transport) {
    this.transport = transport;
    transport.onmessage = (event) => this.dispatch(String(event.data));
  }

  private dispatch(raw: string) {
    let msg: ProtocolMessage;
    try {
      msg = JSON.parse(raw);
    } catch {
      return;
    }
    const entry = msg.seq !== null ? this.pending.get(msg.seq as number) : undefined;
    if (!entry) return;
    if (msg.kind === "animate_frames") {
      entry.onFrames?.(msg.payload.frames as ShapeSnapshot[]);
      return;
    }
    this.pending.delete(msg.seq as number);
    if (msg.kind === "error") {
      entry.reject(new ProtocolError(msg.payload?.message ?? "engine error"));
    } else {
      entry.resolve(msg);
    }
  }

  request(kind: string, payload: object = {},
          onFrames?: (frames: ShapeSnapshot[]) => void): Promise<ProtocolMessage> {
    const seq = ++this.seq;
    return new Promise((resolve, reject) => {
      this.pending.set(seq, { resolve, reject, onFrames });
      this.transport.send(JSON.stringify({ seq, kind, payload }));
    });
  }

  async hello(): Promise<string> {
    const msg = await this.request("hello");
    return msg.payload.schema as string;
  }

  async loadDesign(design: string | object = "canonical"): Promise<StatePayload> {
    const msg = await this.request("load_design", { design });
    return msg.payload as StatePayload;
  }

  async state(): Promise<StatePayload> {
    const msg = await this.request("state");
    return msg.payload as StatePayload;
  }

  async listBranches(): Promise<Branch[]> {
    const msg = await this.request("list_branches");
    return msg.payload.branches as Branch[];
  }

  async applyBranch(branchId: string,
                    onFrames: (frames: ShapeSnapshot[]) => void): Promise<StatePayload> {
    const msg = await this.request("apply_branch", { branch_id: branchId }, onFrames);
    return msg.payload as StatePayload;
  }

  async undo(): Promise<StatePayload> {
    const msg = await this.request("undo");
    return msg.payload as StatePayload;
  }

  async inverseQuery(voxels: number[][], topK = 3): Promise<any[]> {
    const msg = await this.request("inverse_query", { voxels, top_k: topK });
    return msg.payload.results as any[];
  }

  async exportMesh(): Promise<string> {
    const msg = await this.request("export", { what: "mesh" });
    return msg.payload.data as string;
  }

  close() {
    this.transport.close();
  }
}
