//! Prompt visual density and on-screen text expansion for one
//! instruction/code pair.

use animeval::config::MetricConfig;
use animeval::model::Language;
use animeval::text_analysis::{compute_pvd, extract_display_tokens, text_expand};

const PROMPT: &str = "\
# Pythagorean theorem
- Draw a right triangle
- Show squares on each side
- Animate the areas sliding together
$$a^2 + b^2 = c^2$$
";

const CODE: &str = r#"
class Proof(Scene):
    def construct(self):
        title = Title("The Pythagorean Theorem, a visual proof")
        eq = MathTex("a^2 + b^2 = c^2")
        note = Text("Rearranging the four triangles leaves the same empty area", font_size=28)
        self.play(Write(title), Write(eq))
        self.play(FadeIn(note))
"#;

fn main() {
    let cfg = MetricConfig::default();
    let prompt = compute_pvd(PROMPT, Language::En, &cfg);
    println!(
        "structure {}  actions {}  PVD {}  prompt tokens {}",
        prompt.n_struct,
        prompt.n_action,
        prompt.pvd(),
        prompt.token_count
    );

    let display = extract_display_tokens(CODE, &cfg);
    for (ctor, literal) in &display.call_sites {
        println!("{ctor}: {literal:?}");
    }
    println!("unique display tokens {}", display.unique_count());
    println!("TextExpand {:.3}", text_expand(&display, &prompt));

    let zh = compute_pvd("## 勾股定理\n1. 绘制直角三角形\n2. 演示面积变换\n", Language::Zh, &cfg);
    println!("zh PVD {}", zh.pvd());
}
