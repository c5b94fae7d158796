//! Plot-ready CSV extraction: fixed column layout `x,y,<model...>`.

use crate::report::PlotTable;

/// Renders the plot table as CSV; an empty table yields a header-only file.
pub fn emit_plots(plot: &PlotTable) -> String {
    let mut header = String::from("x,y");
    for (name, _) in &plot.models {
        header.push(',');
        header.push_str(name);
    }
    let mut out = header;
    out.push('\n');
    for i in 0..plot.x.len() {
        let mut row = format!("{},{}", plot.x[i], plot.y[i]);
        for (_, col) in &plot.models {
            row.push(',');
            row.push_str(&format!("{}", col[i]));
        }
        out.push_str(&row);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plot_is_header_only() {
        let p = PlotTable::default();
        assert_eq!(emit_plots(&p), "x,y\n");
    }

    #[test]
    fn single_model_has_three_columns() {
        let p = PlotTable {
            x: vec![1.0, 2.0],
            y: vec![3.0, 4.0],
            models: vec![("fit".into(), vec![2.9, 4.1])],
        };
        let csv = emit_plots(&p);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), 3);
        assert_eq!(lines.next().unwrap(), "1,3,2.9");
    }
}
