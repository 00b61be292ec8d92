// Pan with background drag, zoom with the wheel (around the pointer).

export interface CameraTransform {
  x: number;
  y: number;
  k: number;
}

export class Camera {
  transform: CameraTransform = { x: 60, y: 40, k: 1 };
  private dragging = false;
  private lastX = 0;
  private lastY = 0;

  constructor(private target: SVGGElement) {
    this.apply();
  }

  apply(): void {
    const { x, y, k } = this.transform;
    this.target.setAttribute("transform", `translate(${x},${y}) scale(${k})`);
  }

  attach(svg: SVGSVGElement): void {
    svg.addEventListener("mousedown", (event) => {
      if ((event.target as Element).classList?.contains("node")) return;
      this.dragging = true;
      this.lastX = event.clientX;
      this.lastY = event.clientY;
    });
    svg.addEventListener("mousemove", (event) => {
      if (!this.dragging) return;
      this.transform.x += event.clientX - this.lastX;
      this.transform.y += event.clientY - this.lastY;
      this.lastX = event.clientX;
      this.lastY = event.clientY;
      this.apply();
    });
    const stop = () => {
      this.dragging = false;
    };
    svg.addEventListener("mouseup", stop);
    svg.addEventListener("mouseleave", stop);
    svg.addEventListener("wheel", (event) => {
      event.preventDefault();
      const factor = event.deltaY < 0 ? 1.15 : 1 / 1.15;
      const { x, y, k } = this.transform;
      const px = event.offsetX;
      const py = event.offsetY;
      this.transform = {
        k: k * factor,
        x: px - (px - x) * factor,
        y: py - (py - y) * factor,
      };
      this.apply();
    });
  }
}
