//! Sorts failed renders into the error taxonomy and prints the breakdown.

use animeval::model::ExecOutcome;
use animeval::reliability::{classify_failure, error_breakdown, ApiInventory};
use animeval::SampleVerdict;

fn main() -> animeval::Result<()> {
    let inventory = ApiInventory::new([
        "manim.Circle",
        "manim.Create",
        "manim.MathTex",
        "manim.Scene",
        "manim.Scene.play",
        "manim.Text",
    ])?;

    let failures = [
        (
            "hallucinated",
            "self.play(ShowCreation(c))",
            "Traceback (most recent call last):\n  File \"scene.py\", line 7, in construct\n    self.play(ShowCreation(c))\nNameError: name 'ShowCreation' is not defined\n",
        ),
        (
            "misused",
            "c = Circle(radius=1, fill=RED)",
            "Traceback (most recent call last):\n  File \"scene.py\", line 5, in construct\n    c = Circle(radius=1, fill=RED)\nTypeError: Circle.__init__() got an unexpected keyword argument 'fill'\n",
        ),
        (
            "latex",
            "MathTex(r\"\\frac{1}{\")",
            "Traceback (most recent call last):\n  File \"scene.py\", line 4, in construct\nValueError: latex error converting to dvi. See log output above or the log file: media/Tex/abc.log\n",
        ),
        ("syntax", "def construct(self)\n", "  File \"scene.py\", line 3\n    def construct(self)\n                       ^\nSyntaxError: expected ':'\n"),
    ];

    let mut verdicts = Vec::new();
    for (id, code, trace) in failures {
        let category = classify_failure(&ExecOutcome::failure(trace), code, &inventory);
        println!("{id:<14} {category}");
        verdicts.push(SampleVerdict::exec_failure(id, category));
    }
    verdicts.push(SampleVerdict::exec_success("rendered", 0.4, true));

    println!();
    for (category, pct) in error_breakdown(&verdicts)? {
        println!("{:<12} {pct:5.1}%", category.label());
    }
    Ok(())
}
