/**
 * three.js scene adapter: one box per cube at its center/orientation,
 * hinge lines between hinged cube pairs, actuated hinges highlighted.
 * Malformed snapshots are skipped with a user-visible notice instead of
 * crashing the scene.
 */

import * as THREE from "three";
import { ShapeSnapshot } from "./protocol.js";

const CUBE_COLOR = 0xf5f5f0;
const EDGE_COLOR = 0x222222;
const HINGE_COLOR = 0xe6b923;
const ACTUATED_COLOR = 0xd8372a;

export interface HingeDescriptor {
  cube_a: number;
  cube_b: number;
  actuated?: boolean;
}

export class StructureView {
  readonly group = new THREE.Group();
  private boxes: THREE.Mesh[] = [];
  private hingeLines = new THREE.Group();
  private notice: ((msg: string) => void) | undefined;

  constructor(scene: THREE.Object3D, notice?: (msg: string) => void) {
    scene.add(this.group);
    this.group.add(this.hingeLines);
    this.notice = notice;
  }

  get cubeCount(): number {
    return this.boxes.length;
  }

  cubePosition(index: number): [number, number, number] {
    const p = this.boxes[index].position;
    return [p.x, p.y, p.z];
  }

  renderState(snapshot: ShapeSnapshot, hinges: HingeDescriptor[] = []): boolean {
    if (!snapshot || !Array.isArray(snapshot.centers)
        || snapshot.centers.some((c) => c.length !== 3 || c.some((v) => !isFinite(v)))) {
      this.notice?.("malformed snapshot skipped");
      return false;
    }
    this.ensureBoxes(snapshot.centers.length);
    snapshot.centers.forEach((c, i) => {
      const box = this.boxes[i];
      box.position.set(c[0], c[1], c[2]);
      const o = snapshot.orientations?.[i];
      if (o) {
        const m = new THREE.Matrix4();
        m.set(o[0][0], o[0][1], o[0][2], 0,
              o[1][0], o[1][1], o[1][2], 0,
              o[2][0], o[2][1], o[2][2], 0,
              0, 0, 0, 1);
        box.setRotationFromMatrix(m);
      }
    });
    this.drawHinges(snapshot, hinges);
    return true;
  }

  private ensureBoxes(n: number) {
    while (this.boxes.length > n) {
      const box = this.boxes.pop()!;
      this.group.remove(box);
    }
    while (this.boxes.length < n) {
      const geom = new THREE.BoxGeometry(2, 2, 2);
      const mat = new THREE.MeshStandardMaterial({ color: CUBE_COLOR });
      const box = new THREE.Mesh(geom, mat);
      box.add(new THREE.LineSegments(
        new THREE.EdgesGeometry(geom),
        new THREE.LineBasicMaterial({ color: EDGE_COLOR })));
      this.group.add(box);
      this.boxes.push(box);
    }
  }

  private drawHinges(snapshot: ShapeSnapshot, hinges: HingeDescriptor[]) {
    this.group.remove(this.hingeLines);
    this.hingeLines = new THREE.Group();
    for (const h of hinges) {
      const a = snapshot.centers[h.cube_a - 1];
      const b = snapshot.centers[h.cube_b - 1];
      if (!a || !b) continue;
      const geom = new THREE.BufferGeometry().setFromPoints([
        new THREE.Vector3(...(a as [number, number, number])),
        new THREE.Vector3(...(b as [number, number, number])),
      ]);
      const mat = new THREE.LineBasicMaterial({
        color: h.actuated ? ACTUATED_COLOR : HINGE_COLOR,
      });
      this.hingeLines.add(new THREE.Line(geom, mat));
    }
    this.group.add(this.hingeLines);
  }
}
