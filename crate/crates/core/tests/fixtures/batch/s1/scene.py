from manim import *

class Grow(Scene):
    def construct(self):
        title = Text("Circles").to_edge(UP)
        self.add(title)
        self.play(GrowFromCenter(Circle()))
