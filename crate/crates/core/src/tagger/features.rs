use crate::lemma_rules::fold_lowercase;

const BOS: &str = "<s>";
const EOS: &str = "</s>";

/// Collapsed character-class shape: `Praha` -> `Xx`, `3.5` -> `d.d`.
fn shape(form: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    for c in form.chars() {
        let class = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            'd'
        } else {
            c
        };
        if last != Some(class) {
            out.push(class);
            last = Some(class);
        }
    }
    out
}

/// Feature strings for the token at `index`.
///
/// Templates: bias, form, lowercased form, lowercased prefixes and suffixes
/// of length 1-4, shape, lowercased neighbours at offsets -2..=2 (with
/// `<s>`/`</s>` padding), and first/last-token markers.
pub fn token_features(lowered: &[String], forms: &[&str], index: usize) -> Vec<String> {
    let form = forms[index];
    let lower = &lowered[index];
    let chars: Vec<char> = lower.chars().collect();
    let mut feats = Vec::with_capacity(20);
    feats.push("b".to_owned());
    feats.push(format!("w={form}"));
    feats.push(format!("l={lower}"));
    for n in 1..=4.min(chars.len()) {
        let p: String = chars[..n].iter().collect();
        let s: String = chars[chars.len() - n..].iter().collect();
        feats.push(format!("p{n}={p}"));
        feats.push(format!("s{n}={s}"));
    }
    feats.push(format!("sh={}", shape(form)));
    for offset in [-2isize, -1, 1, 2] {
        let j = index as isize + offset;
        let neighbour = if j < 0 {
            BOS
        } else if j as usize >= forms.len() {
            EOS
        } else {
            lowered[j as usize].as_str()
        };
        feats.push(format!("w{offset:+}={neighbour}"));
    }
    if index == 0 {
        feats.push("first".to_owned());
    }
    if index + 1 == forms.len() {
        feats.push("last".to_owned());
    }
    feats
}

pub(crate) fn sentence_features(forms: &[&str]) -> Vec<Vec<String>> {
    let lowered: Vec<String> = forms.iter().map(|f| fold_lowercase(f)).collect();
    (0..forms.len())
        .map(|i| token_features(&lowered, forms, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(shape("Praha"), "Xx");
        assert_eq!(shape("3.5"), "d.d");
        assert_eq!(shape("ČSSD"), "X");
    }

    #[test]
    fn templates() {
        let f = sentence_features(&["Pes", "štěká"]);
        assert!(f[0].contains(&"w=Pes".to_owned()));
        assert!(f[0].contains(&"l=pes".to_owned()));
        assert!(f[0].contains(&"s2=es".to_owned()));
        assert!(f[0].contains(&"w-1=<s>".to_owned()));
        assert!(f[0].contains(&"w+1=štěká".to_owned()));
        assert!(f[0].contains(&"first".to_owned()));
        assert!(f[1].contains(&"p4=štěk".to_owned()));
        assert!(f[1].contains(&"w+2=</s>".to_owned()));
        assert!(f[1].contains(&"last".to_owned()));
        assert!(!f[0].iter().any(|x| x.starts_with("p4=")));
    }
}
